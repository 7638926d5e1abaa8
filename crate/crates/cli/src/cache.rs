//! Content-addressed JSON cache for scan results.
//!
//! Keys are SHA-256 digests of the schema version, the resolved run
//! configuration and a hash of the generator family. Entries are written to a
//! temporary file in the cache directory and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use kmv_core::units::cyclotomic_indices;
use kmv_core::Error;

use crate::{RunConfig, SCHEMA};

/// Environment variable overriding the cache location.
pub const CACHE_ENV: &str = "KMV_CACHE_DIR";

/// A cache directory.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// `$KMV_CACHE_DIR`, else `$HOME/.cache/kmv`; `None` without either.
    pub fn from_env() -> Option<Self> {
        let dir = match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => PathBuf::from(std::env::var_os("HOME")?).join(".cache").join("kmv"),
        };
        Some(Self { dir })
    }

    /// The directory.
    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A stored document, if present and readable.
    pub fn get(&self, key: &str) -> Option<Value> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Store a document atomically.
    pub fn put(&self, key: &str, v: &Value) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(serde_json::to_string(v).expect("values serialize").as_bytes())?;
        tmp.flush()?;
        tmp.persist(self.path(key)).map_err(|e| e.error)?;
        Ok(())
    }
}

/// Hash of the ordered generator family `ξ_a` at a level.
pub fn family_hash(p: u32, level: u32) -> Result<String, Error> {
    let idx = cyclotomic_indices(p, level)?;
    let mut h = Sha256::new();
    for a in idx {
        h.update(a.to_le_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

/// Cache key for a run.
pub fn key(rc: &RunConfig, family: &str) -> String {
    let cfg = serde_json::to_string(rc).expect("config serializes");
    let mut h = Sha256::new();
    h.update(SCHEMA.as_bytes());
    h.update([0]);
    h.update(cfg.as_bytes());
    h.update([0]);
    h.update(family.as_bytes());
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::Format;

    fn rc(window: Option<usize>) -> RunConfig {
        RunConfig {
            command: "vplus",
            p: Some(5),
            n: Some(1),
            model: None,
            format: Format::Json,
            seed: None,
            cache_dir: None,
            window,
            exhaustive: false,
            budget: None,
        }
    }

    #[test]
    fn keys_separate_configurations() {
        let f = family_hash(5, 1).unwrap();
        assert_eq!(key(&rc(None), &f), key(&rc(None), &f));
        assert_ne!(key(&rc(None), &f), key(&rc(Some(3)), &f));
        assert_ne!(key(&rc(None), &f), key(&rc(None), &family_hash(7, 1).unwrap()));
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache { dir: dir.path().join("nested") };
        let v = serde_json::json!({"a": [1, 2], "b": "x"});
        c.put("k", &v).unwrap();
        assert_eq!(c.get("k"), Some(v));
        assert_eq!(c.get("missing"), None);
    }
}
