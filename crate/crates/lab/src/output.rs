//! Report files. CSV schemas are versioned in a leading comment line.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::pipeline::{Report, Timings};
use crate::HarnessError;

pub const SPEEDS_HEADER: &str = "# shearfront speeds v1";
pub const GAMMASTAR_HEADER: &str = "# shearfront gammastar v1";

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String, HarnessError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per amplitude: `A, c*, γ_A` and the identity errors.
pub fn speeds_csv(report: &Report) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["amplitude", "c_star", "gamma", "rel_err_reaction", "rel_err_energy", "ux_l1"])?;
    for e in report.speeds.iter().flat_map(|s| &s.entries) {
        let id = e.front.as_ref().map(|f| &f.identities);
        w.write_record([
            e.amplitude.to_string(),
            e.c_star.to_string(),
            e.gamma.to_string(),
            opt(id.map(|i| i.rel_err_reaction)),
            opt(id.map(|i| i.rel_err_energy)),
            opt(id.map(|i| i.ux_l1)),
        ])?;
    }
    with_header(SPEEDS_HEADER, w)
}

/// One row per estimate: `route, value, error_bar`.
pub fn gammastar_csv(report: &Report) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["route", "value", "error_bar"])?;
    for e in &report.estimates {
        w.write_record([e.route.clone(), e.value.to_string(), e.error_bar.to_string()])?;
    }
    with_header(GAMMASTAR_HEADER, w)
}

fn with_header(header: &str, w: csv::Writer<Vec<u8>>) -> Result<String, HarnessError> {
    let body = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
    let body = String::from_utf8(body).map_err(|e| HarnessError::Report(e.to_string()))?;
    Ok(format!("{header}\n{body}"))
}

/// Writes a file through a temporary sibling and a rename.
fn write_atomic(path: &Path, text: &str) -> Result<(), HarnessError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(text.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_all(dir: &Path, report: &Report, timings: &Timings) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join("report.json"), &to_json(report)?)?;
    write_atomic(&dir.join("speeds.csv"), &speeds_csv(report)?)?;
    write_atomic(&dir.join("gammastar.csv"), &gammastar_csv(report)?)?;
    write_atomic(&dir.join("timings.json"), &to_json(timings)?)?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<Report, HarnessError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config {
        location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })
}
