//! Content-addressed file cache for route records.
//!
//! Keys hash the route name, the config sections the route reads, the grid
//! refinement and the crate versions. Entries are written to a temporary
//! file and renamed into place, so readers never see partial writes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::HarnessError;

/// Bumped whenever record layouts change.
pub const CACHE_FORMAT: u32 = 1;

#[derive(Debug, Clone)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: Some(dir.to_path_buf()),
        }
    }

    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    /// Hex digest of the canonical JSON of `parts`.
    pub fn key(route: &str, parts: &impl Serialize) -> String {
        let body = serde_json::to_vec(parts).expect("cache key serializes");
        let mut h = Sha256::new();
        h.update(format!(
            "{route}\0{CACHE_FORMAT}\0{}\0{}\0",
            shearfront_core::VERSION,
            env!("CARGO_PKG_VERSION")
        ));
        h.update(&body);
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let text = fs::read(self.path(key)?).ok()?;
        serde_json::from_slice(&text).ok()
    }

    pub fn put<T: Serialize>(&self, key: &str, value: &T) -> Result<(), HarnessError> {
        let Some(path) = self.path(key) else {
            return Ok(());
        };
        let dir = path.parent().expect("cache path has a parent");
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(".{key}.{}.tmp", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(value)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}
