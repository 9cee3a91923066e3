use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Fingerprint};
use super::report::RegressionCheck;
use crate::Result;

/// Relative slack granted over a calibrated value.
pub const REGRESSION_SLACK: f64 = 0.10;

const EMBEDDED: &str = include_str!("../../baselines/calibration.json");

/// Ensemble statistics frozen from one calibration run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseline {
    pub fingerprint: Option<Fingerprint>,
    pub k_hat: Option<f64>,
    pub llogl_ratio: Option<f64>,
    /// `max α̂_p·(p−1)` keyed by `p` as printed.
    #[serde(default)]
    pub alpha_scaled: BTreeMap<String, f64>,
}

impl Baseline {
    pub fn embedded() -> Self {
        serde_json::from_str(EMBEDDED).expect("checked-in calibration baseline parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The baseline applies only to the configuration it was calibrated on.
    pub fn matches(&self, cfg: &ExperimentConfig) -> bool {
        self.fingerprint.as_ref() == Some(&cfg.fingerprint())
    }
}

pub(crate) fn regression(name: &str, value: f64, calibrated: Option<f64>) -> Option<RegressionCheck> {
    calibrated.map(|c| {
        let threshold = c * (1.0 + REGRESSION_SLACK);
        RegressionCheck { name: name.into(), value, threshold, pass: value <= threshold }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_baseline_parses() {
        let b = Baseline::embedded();
        if let Some(fp) = &b.fingerprint {
            let cfg = ExperimentConfig {
                dimension: fp.dimension,
                filtration: fp.filtration,
                depth: fp.depth,
                trials: fp.trials,
                seed: fp.seed,
                alpha: fp.alpha,
                beta: fp.beta,
                ..Default::default()
            };
            assert!(b.matches(&cfg));
            assert!(!b.matches(&ExperimentConfig { seed: fp.seed ^ 1, ..cfg }));
        }
        assert!(Baseline::from_json(r#"{"k_hat": 1.0, "extra": 2}"#).is_err());
    }

    #[test]
    fn slack_is_ten_percent() {
        let r = regression("x", 1.09, Some(1.0)).unwrap();
        assert!(r.pass);
        assert!(!regression("x", 1.11, Some(1.0)).unwrap().pass);
        assert!(regression("x", 1.0, None).is_none());
    }
}
