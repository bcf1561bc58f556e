use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shearfront::{execute, output, ExperimentConfig, HarnessError, RunOptions, Stage};

#[derive(Parser)]
#[command(version, about = "Front speeds in shear flows: sweeps, limit routes and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Recompute every route instead of reading the cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Cache directory; defaults to `<out>/.cache`.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads for independent routes.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Halve every grid spacing this many times.
    #[arg(long, global = true, default_value_t = 0)]
    grid_refine: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Run every enabled route.
    Run { config: String },
    /// Run the amplitude sweep and its audits.
    Speeds { config: String },
    /// Run the limit routes.
    Gammastar { config: String },
    /// Re-verify the checks of an existing report.
    Check { report: PathBuf },
}

fn run(cli: Cli) -> Result<i32, HarnessError> {
    let (stage, spec) = match cli.command {
        Command::Run { config } => (Stage::Run, config),
        Command::Speeds { config } => (Stage::Speeds, config),
        Command::Gammastar { config } => (Stage::Gammastar, config),
        Command::Check { report } => return check(&report),
    };
    let cfg = ExperimentConfig::load(&spec)?;
    let out = cli.out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    let opts = RunOptions {
        stage,
        out: Some(out.clone()),
        cache: !cli.no_cache,
        cache_dir: cli.cache_dir,
        threads: cli.threads,
        grid_refine: cli.grid_refine,
    };
    let outcome = execute(&cfg, &opts)?;
    let r = &outcome.report;
    for c in r.checks.iter().filter(|c| !c.passed()) {
        eprintln!("FAIL {}: value {:?}, limit {:?}; {}", c.name, c.value, c.limit, c.detail);
    }
    let passed = r.checks.iter().filter(|c| c.passed()).count();
    println!(
        "{}: {passed}/{} checks pass, {} solver calls, {:.1} s; report in {}",
        r.name,
        r.checks.len(),
        outcome.timings.solver_calls,
        outcome.timings.total_seconds,
        out.display()
    );
    Ok(outcome.exit_code())
}

fn check(path: &std::path::Path) -> Result<i32, HarnessError> {
    let report = output::read_report(path)?;
    let fresh = report.recheck();
    let mut code = 0;
    for c in &fresh {
        let stored = report.check(&c.name).map(|s| s.status);
        let tag = if c.passed() { "pass" } else { "FAIL" };
        println!("{tag} {}: {}", c.name, c.detail);
        if !c.passed() || stored != Some(c.status) {
            code = shearfront::EXIT_FAILURE;
        }
    }
    if fresh.len() != report.checks.len() {
        eprintln!("report lists {} checks, recomputation gives {}", report.checks.len(), fresh.len());
        code = shearfront::EXIT_FAILURE;
    }
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
