//! Experiment configuration: flat `key = value` text (TOML syntax, dotted
//! keys allowed), validated before any stage runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// Sizes pinned by the acceptance criteria.
    Acceptance,
    /// Small sizes for smoke runs.
    Quick,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Replicas {
    pub gff: usize,
    pub cover: usize,
    /// Vertices of the start panel actually walked from.
    pub cover_starts: usize,
    pub resistance_pairs: usize,
}

impl Default for Replicas {
    fn default() -> Self {
        Replicas { gff: 200, cover: 10, cover_starts: 2, resistance_pairs: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub lambda: Vec<f64>,
    /// Base of the logarithm in the headline predictor: `e` or `2`.
    pub log_base: String,
    /// Depth-census exponent `γ`.
    pub gamma: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants { c1: 0.5, c2: 2.0, lambda: vec![1.0, 10.0, 100.0], log_base: "e".into(), gamma: 0.5 }
    }
}

impl Constants {
    pub fn ln_base(&self) -> f64 {
        if self.log_base == "2" {
            std::f64::consts::LN_2
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Stages {
    pub gen: bool,
    pub apoh: bool,
    pub resist: bool,
    pub gff: bool,
    pub cover: bool,
    pub skeleton: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Stages { gen: true, apoh: true, resist: true, gff: true, cover: true, skeleton: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Verify {
    pub scale: Scale,
    /// Checks the commute identity without its factor 2.
    pub literal_commute: bool,
}

impl Default for Verify {
    fn default() -> Self {
        Verify { scale: Scale::Acceptance, literal_commute: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_n")]
    pub n: Vec<u64>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// Master seed. Required: nothing falls back to the clock.
    pub seed: u64,
    /// Independent samples per grid point.
    #[serde(default = "one")]
    pub seeds: usize,
    #[serde(default)]
    pub replicas: Replicas,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub stages: Stages,
    #[serde(default)]
    pub verify: Verify,
}

fn default_n() -> Vec<u64> {
    vec![1_000_000]
}

fn default_eps() -> Vec<f64> {
    vec![0.1]
}

fn one() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

pub const MIN_N: u64 = 1_000;

impl ExperimentConfig {
    /// Defaults everywhere except the seed.
    pub fn with_seed(seed: u64) -> Self {
        toml::from_str(&format!("seed = {seed}")).expect("defaults parse")
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.n.is_empty() || self.eps.is_empty() {
            return bad("the n and eps lists must be nonempty".into());
        }
        if let Some(n) = self.n.iter().find(|&&n| n < MIN_N) {
            return bad(format!("n = {n} is below {MIN_N}"));
        }
        if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return bad(format!("eps = {e} is outside (0, 1)"));
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        let r = &self.replicas;
        if r.gff < giantwalk_core::gff::MIN_REPLICAS {
            return bad(format!("replicas.gff must be at least {}", giantwalk_core::gff::MIN_REPLICAS));
        }
        if r.cover < giantwalk_core::walk::MIN_COVER_REPLICAS {
            return bad(format!("replicas.cover must be at least {}", giantwalk_core::walk::MIN_COVER_REPLICAS));
        }
        if r.cover_starts == 0 {
            return bad("replicas.cover_starts must be at least 1".into());
        }
        let c = &self.constants;
        if !(c.c1 > 0.0 && c.c1 <= c.c2) {
            return bad("constants need 0 < c1 <= c2".into());
        }
        if c.lambda.is_empty() || c.lambda.iter().any(|&l| !(l > 0.0)) {
            return bad("constants.lambda must be a nonempty list of positive values".into());
        }
        if c.log_base != "e" && c.log_base != "2" {
            return bad(format!("constants.log_base must be \"e\" or \"2\", got {:?}", c.log_base));
        }
        if !(c.gamma > 0.0 && c.gamma < 1.0) {
            return bad("constants.gamma must lie in (0, 1)".into());
        }
        Ok(())
    }

    /// `(n, ε)` pairs in row-major order.
    pub fn grid(&self) -> Vec<(u64, f64)> {
        self.n.iter().flat_map(|&n| self.eps.iter().map(move |&e| (n, e))).collect()
    }

    /// SHA-256 of the canonical JSON form, hex.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(canon))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dotted_keys_and_defaults() {
        let c = ExperimentConfig::parse("seed = 7\nn = [2000, 5000]\neps = [0.1, 0.2]\nreplicas.cover = 12\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.grid().len(), 4);
        assert_eq!(c.grid()[1], (2000, 0.2));
        assert_eq!(c.replicas.cover, 12);
        assert_eq!(c.replicas.gff, 200);
        assert!(c.stages.skeleton);
        assert_eq!(c.verify.scale, Scale::Acceptance);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "n = [1000000]",
            "seed = 1\neps = [1.5]",
            "seed = 1\neps = [0.0]",
            "seed = 1\nn = [999]",
            "seed = 1\nbogus = 3",
            "seed = 1\nreplicas.gff = 10",
            "seed = 1\nconstants.log_base = \"10\"",
            "seed = 1\nseeds = 0",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(ConfigError::Invalid(_))), "{text}");
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::with_seed(1);
        let b = ExperimentConfig::with_seed(2);
        assert_eq!(a.hash(), ExperimentConfig::with_seed(1).hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
