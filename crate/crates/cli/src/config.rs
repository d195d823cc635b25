use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lct_numra::report::default_tolerances;
use lct_numra::{CanonicalMatrix, Grid, TranslationSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Parameters of a NUMRA-compatible sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    /// Largest dilation level the grid supports exactly.
    pub max_level: u32,
    /// Samples per finest Haar cell.
    pub refine: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { lo: -4.0, hi: 5.0, max_level: 2, refine: 16 }
    }
}

impl GridSpec {
    pub fn build(&self, n: u32) -> Result<Grid<f64>> {
        Ok(Grid::numra(n, self.max_level, self.refine, self.lo, self.hi)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "CanonicalMatrix::fourier")]
    pub matrix: CanonicalMatrix<f64>,
    #[serde(default = "default_ts")]
    pub ts: TranslationSet,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "all_tolerances")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_ts() -> TranslationSet {
    TranslationSet::new(1, 1).expect("N = 1, r = 1 is admissible")
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(".")
}

/// Library condition tolerances plus the CLI's own checks.
pub fn all_tolerances() -> BTreeMap<String, f64> {
    let mut t = default_tolerances();
    t.insert("det".into(), lct_numra::canonical::UNIMODULAR_TOL);
    t.insert("gram".into(), 1e-3);
    t.insert("tail".into(), 1e-8);
    t.insert("recursion".into(), 1e-10);
    t
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            matrix: CanonicalMatrix::fourier(),
            ts: default_ts(),
            grid: GridSpec::default(),
            tolerances: all_tolerances(),
            output_dir: default_output_dir(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg: Self = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => Self::default(),
        };
        Ok(cfg)
    }

    /// Missing tolerance keys fall back to their defaults.
    pub fn validate(&mut self) -> Result<()> {
        for (k, v) in all_tolerances() {
            self.tolerances.entry(k).or_insert(v);
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            bail!("tolerance {k:?} must be positive and finite, got {v}");
        }
        if !(self.grid.hi > self.grid.lo) || self.grid.refine == 0 {
            bail!("grid needs lo < hi and refine >= 1");
        }
        Ok(())
    }

    pub fn tol(&self, key: &str) -> f64 {
        self.tolerances[key]
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_losslessly() {
        let mut c = RunConfig {
            matrix: CanonicalMatrix::new(2.0, 1.0, 1.0, 1.0),
            ts: TranslationSet::new(3, 5).unwrap(),
            ..RunConfig::default()
        };
        c.grid.lo = -0.1;
        c.tolerances.insert("gram".into(), 1.0 / 3.0);
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn rejects_bad_tolerances() {
        let mut c = RunConfig::default();
        c.tolerances.insert("2.21".into(), 0.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn rejects_inadmissible_translation_set() {
        let r = serde_json::from_str::<RunConfig>(r#"{"ts": {"N": 2, "r": 2}}"#);
        assert!(r.is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.grid.refine += 1;
        assert_ne!(a.hash(), b.hash());
    }
}
