//! On-disk cache of class sets and Brandt matrices.
//!
//! Entries are JSON files carrying a format version. Anything that fails to
//! parse or validate is reported on stderr and recomputed.

use std::fs;
use std::path::{Path, PathBuf};

use brandt_core::{BrandtMatrix, ClassOptions, ClassSet, Result};

pub const CACHE_ENV: &str = "BRANDT_CACHE_DIR";

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    /// `$BRANDT_CACHE_DIR`, else `$XDG_CACHE_HOME/brandt`, else
    /// `$HOME/.cache/brandt`; `None` disables caching.
    pub fn from_env(enabled: bool) -> Self {
        if !enabled {
            return Cache { dir: None };
        }
        let dir = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("XDG_CACHE_HOME").map(|d| PathBuf::from(d).join("brandt")))
            .or_else(|| std::env::var_os("HOME").map(|d| PathBuf::from(d).join(".cache").join("brandt")));
        Cache { dir }
    }

    fn class_path(&self, g: usize, p: i64, opts: &ClassOptions) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("classes-g{g}-p{p}-t{}.json", opts.theta_terms)))
    }

    fn brandt_path(&self, g: usize, p: i64, opts: &ClassOptions, n: i64) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("brandt-g{g}-p{p}-t{}-n{n}.json", opts.theta_terms)))
    }

    pub fn class_set(&self, g: usize, p: i64, opts: &ClassOptions) -> Result<ClassSet> {
        let path = self.class_path(g, p, opts);
        if let Some(text) = path.as_deref().and_then(read) {
            match ClassSet::from_json(&text) {
                Ok(s) if s.g == g && s.p == p => return Ok(s),
                Ok(_) => warn(path.as_deref(), "entry is for different parameters"),
                Err(e) => warn(path.as_deref(), &e.to_string()),
            }
        }
        let s = brandt_core::class_set(g, p, opts)?;
        if let Some(path) = path {
            write(&path, &s.to_json());
        }
        Ok(s)
    }

    pub fn brandt_matrix(&self, opts: &ClassOptions, set: &ClassSet, n: i64) -> Option<BrandtMatrix> {
        let path = self.brandt_path(set.g, set.p, opts, n);
        let text = path.as_deref().and_then(read)?;
        match BrandtMatrix::from_json(&text) {
            Ok(m) if m.g == set.g && m.p == set.p && m.n == n && m.weights == set.aut_counts => Some(m),
            Ok(_) => {
                warn(path.as_deref(), "entry does not match the class set");
                None
            }
            Err(e) => {
                warn(path.as_deref(), &e.to_string());
                None
            }
        }
    }

    pub fn store_brandt(&self, opts: &ClassOptions, m: &BrandtMatrix) {
        if let Some(path) = self.brandt_path(m.g, m.p, opts, m.n) {
            write(&path, &m.to_json());
        }
    }
}

fn read(path: &Path) -> Option<String> {
    fs::read_to_string(path).ok()
}

fn warn(path: Option<&Path>, why: &str) {
    let shown = path.map(|p| p.display().to_string()).unwrap_or_default();
    eprintln!("warning: ignoring cache entry {shown}: {why}; recomputing");
}

/// Best-effort atomic write; failures only cost a recomputation later.
fn write(path: &Path, text: &str) {
    let Some(dir) = path.parent() else { return };
    if fs::create_dir_all(dir).is_err() {
        return;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    if fs::write(&tmp, text).is_ok() && fs::rename(&tmp, path).is_err() {
        let _ = fs::remove_file(&tmp);
    }
}
