use serde::{Deserialize, Serialize};

/// The single tolerance record consulted by every numerical predicate.
///
/// `psd` and `cluster` are relative: they are multiplied by `1 + ‖x‖_∞`
/// of the operator under test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub psd: f64,
    pub projection: f64,
    pub span_residual: f64,
    pub cluster: f64,
    pub meet: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { hermiticity: 1e-9, psd: 1e-9, projection: 1e-8, span_residual: 1e-9, cluster: 1e-8, meet: 1e-7 }
    }
}

impl Tolerances {
    pub(crate) fn psd_scaled(&self, norm: f64) -> f64 {
        self.psd * (1.0 + norm)
    }

    pub(crate) fn cluster_scaled(&self, norm: f64) -> f64 {
        self.cluster * (1.0 + norm)
    }
}
