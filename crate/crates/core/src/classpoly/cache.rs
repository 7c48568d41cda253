//! On-disk cache of class polynomials, one JSON file per (D, algorithm
//! version). Writes go to a temporary file that is renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{hilbert_class_poly, ClassPolynomial, ALGORITHM_VERSION};
use crate::error::Result;
use crate::quadforms::Discriminant;

#[derive(Clone, Debug)]
pub struct ClassPolyCache {
    dir: PathBuf,
}

impl ClassPolyCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ClassPolyCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, d: Discriminant) -> PathBuf {
        self.dir.join(format!("classpoly-v{ALGORITHM_VERSION}-D{}.json", d.value()))
    }

    /// Cached entry, if present and well formed for this D.
    pub fn load(&self, d: Discriminant) -> Option<ClassPolynomial> {
        let text = fs::read_to_string(self.path_for(d)).ok()?;
        let v: serde_json::Value = serde_json::from_str(&text).ok()?;
        ClassPolynomial::from_json(&v).ok().filter(|h| h.disc == d)
    }

    pub fn store(&self, h: &ClassPolynomial) -> Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(h.to_json().to_string().as_bytes())?;
        tmp.flush()?;
        tmp.persist(self.path_for(h.disc)).map_err(|e| e.error)?;
        Ok(())
    }

    /// Load or compute, storing fresh results. Corrupt entries are recomputed.
    pub fn get(&self, d: Discriminant) -> Result<ClassPolynomial> {
        if let Some(h) = self.load(d) {
            return Ok(h);
        }
        let h = hilbert_class_poly(d)?;
        self.store(&h)?;
        Ok(h)
    }
}
