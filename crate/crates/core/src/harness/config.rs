use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::martingale::Ensemble;
use crate::random;
use crate::tracial::{Filtration, FiltrationDescriptor};
use crate::{Error, Result, Tolerances};

/// Filtration family drawn per trial. `Mixed` cycles tensor, dyadic diagonal
/// and Haar-conjugated tensor by trial index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiltrationChoice {
    Tensor,
    DyadicDiagonal,
    Conjugated,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub filtration: FiltrationChoice,
    pub depth: usize,
    pub trials: usize,
    pub seed: u64,
    pub p_grid: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dimension: 16,
            filtration: FiltrationChoice::Mixed,
            depth: 4,
            trials: 200,
            seed: 1729,
            p_grid: vec![1.05, 1.1, 1.2, 1.5, 2.0, 3.0, 4.0],
            alpha: 0.5,
            beta: 0.5,
            tolerances: Tolerances::default(),
            output_dir: None,
        }
    }
}

/// The fields a calibration baseline is tied to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fingerprint {
    pub dimension: usize,
    pub filtration: FiltrationChoice,
    pub depth: usize,
    pub trials: usize,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::Config(format!("dimension {} must be at least 2", self.dimension)));
        }
        if self.depth == 0 || self.depth > 16 || !self.dimension.is_multiple_of(1usize << self.depth) {
            return Err(Error::Config(format!(
                "depth {} needs 2^depth to divide dimension {}",
                self.depth, self.dimension
            )));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
            return Err(Error::Config(format!("p_grid entry {p} must lie in (1, ∞)")));
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint {
            dimension: self.dimension,
            filtration: self.filtration,
            depth: self.depth,
            trials: self.trials,
            seed: self.seed,
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

/// Per-trial inputs: sub-seed `splitmix64(seed ⊕ trial)`, 70/30 Wishart/spiky
/// by `trial mod 10`, and the filtration.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub trial: usize,
    pub seed: u64,
    pub ensemble: Ensemble,
    pub filtration: Arc<Filtration>,
}

/// Filtrations shared across trials.
#[derive(Debug, Clone)]
pub struct TrialFactory {
    choice: FiltrationChoice,
    tensor: Arc<Filtration>,
    dyadic: Option<Arc<Filtration>>,
}

impl TrialFactory {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let tol = cfg.tolerances;
        let tensor = Arc::new(FiltrationDescriptor::tensor(cfg.dimension, cfg.depth).build_with(tol)?);
        let dyadic = match cfg.filtration {
            FiltrationChoice::DyadicDiagonal | FiltrationChoice::Mixed => {
                Some(Arc::new(FiltrationDescriptor::dyadic_diagonal(cfg.dimension, cfg.depth).build_with(tol)?))
            }
            _ => None,
        };
        Ok(Self { choice: cfg.filtration, tensor, dyadic })
    }

    pub fn setup(&self, master_seed: u64, trial: usize) -> Result<TrialSetup> {
        let seed = random::trial_seed(master_seed, trial as u64);
        let ensemble = if trial % 10 < 7 { Ensemble::Wishart } else { Ensemble::Spiky };
        let kind = match self.choice {
            FiltrationChoice::Mixed => {
                [FiltrationChoice::Tensor, FiltrationChoice::DyadicDiagonal, FiltrationChoice::Conjugated][trial % 3]
            }
            other => other,
        };
        let filtration = match kind {
            FiltrationChoice::Tensor | FiltrationChoice::Mixed => self.tensor.clone(),
            FiltrationChoice::DyadicDiagonal => self.dyadic.clone().expect("built for this choice"),
            FiltrationChoice::Conjugated => {
                Arc::new(Filtration::conjugated_seeded(&self.tensor, random::splitmix64(seed ^ 0x0c0f))?)
            }
        };
        Ok(TrialSetup { trial, seed, ensemble, filtration })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_unknown_keys() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert!(ExperimentConfig::from_json(r#"{"dimensions": 8}"#).is_err());
        let cfg = ExperimentConfig::from_json(r#"{"dimension": 8, "depth": 3, "tolerances": {"psd": 1e-8}}"#).unwrap();
        assert_eq!(cfg.tolerances.psd, 1e-8);
        assert_eq!(cfg.tolerances.cluster, Tolerances::default().cluster);
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::from_json(r#"{"dimension": 12, "depth": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"alpha": 1.0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"p_grid": [1.0]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"filtration": "dyadic_diagonal"}"#).is_ok());
    }

    #[test]
    fn trials_are_seeded_and_mixed() {
        let cfg = ExperimentConfig { dimension: 8, depth: 3, ..Default::default() };
        let fac = TrialFactory::new(&cfg).unwrap();
        let a = fac.setup(cfg.seed, 2).unwrap();
        let b = fac.setup(cfg.seed, 2).unwrap();
        assert_eq!(a.seed, b.seed);
        assert_eq!(a.filtration.descriptor(), b.filtration.descriptor());
        assert_ne!(fac.setup(cfg.seed, 3).unwrap().seed, a.seed);
        assert_eq!(fac.setup(cfg.seed, 7).unwrap().ensemble, Ensemble::Spiky);
        assert_eq!(fac.setup(cfg.seed, 6).unwrap().ensemble, Ensemble::Wishart);
        assert!(!fac.setup(cfg.seed, 1).unwrap().filtration.is_terminal());
    }
}
