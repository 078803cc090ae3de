//! Output files and the result cache.
//!
//! Cached payloads live at `<root>/<command>/<key>.json`; derivation
//! checkpoints at `<root>/checkpoints/<key>.jsonl`. Every write goes to a
//! temporary file in the same directory and is renamed into place.

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::{Command, JobConfig};
use crate::error::Result;
use crate::VERSION;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Cache key: command, parameters, interpretation switches and code version.
pub fn cache_key(c: &JobConfig) -> Result<String> {
    let mut key = c.command.name().to_string();
    let r = if c.command == Command::Derive { Some(c.derive_r()) } else { c.r };
    for (tag, x) in [("g", c.g.map(|x| x as usize)), ("n", c.n), ("r", r.map(|x| x as usize))] {
        if let Some(x) = x {
            key.push_str(&format!("-{tag}{x}"));
        }
    }
    let list = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(".");
    if !c.sigma.is_empty() {
        key.push_str(&format!("-s{}", list(&c.sigma)));
    }
    if !c.a.is_empty() {
        key.push_str(&format!("-a{}", list(&c.a)));
    }
    key.push_str(&format!("-{}-{}", c.kappa_variant, c.delta_reading));
    if let Some(p) = &c.within {
        let mut h = DefaultHasher::new();
        fs::read(p)?.hash(&mut h);
        key.push_str(&format!("-w{:016x}", h.finish()));
    }
    key.push_str(&format!("-v{VERSION}"));
    Ok(key)
}

pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    fn payload_path(&self, c: &JobConfig) -> Result<PathBuf> {
        Ok(self.root.join(c.command.name()).join(format!("{}.json", cache_key(c)?)))
    }

    pub fn checkpoint_path(&self, c: &JobConfig) -> Result<PathBuf> {
        Ok(self.root.join("checkpoints").join(format!("{}.jsonl", cache_key(c)?)))
    }

    /// Cached payload, if present and readable. Unreadable entries count as misses.
    pub fn load(&self, c: &JobConfig) -> Result<Option<Value>> {
        let path = self.payload_path(c)?;
        let Ok(text) = fs::read_to_string(&path) else { return Ok(None) };
        let Ok(doc) = serde_json::from_str::<Value>(&text) else { return Ok(None) };
        if doc["key"] != cache_key(c)? {
            return Ok(None);
        }
        Ok(doc.get("payload").cloned())
    }

    pub fn store(&self, c: &JobConfig, payload: &Value) -> Result<()> {
        let doc = serde_json::json!({"key": cache_key(c)?, "payload": payload});
        write_atomic(&self.payload_path(c)?, serde_json::to_string(&doc)?.as_bytes())?;
        Ok(())
    }
}
