//! The ambient algebra `M_N` with normalized trace, its unital *-subalgebras
//! and the trace-preserving conditional expectations onto them.

mod filtration;
mod operator;
mod subalgebra;

pub use filtration::{Filtration, FiltrationDescriptor, FiltrationKind, FiltrationParams};
pub use operator::{Operator, OperatorJson};
pub use subalgebra::{Subalgebra, SubalgebraReport};

use crate::{Error, Result, Tolerances};

/// `M_N` together with the tolerance policy used by every predicate on its
/// operators. Two operators can be combined only if their contexts agree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracialContext {
    dim: usize,
    tol: Tolerances,
}

impl TracialContext {
    pub fn new(dim: usize) -> Result<Self> {
        Self::with_tolerances(dim, Tolerances::default())
    }

    pub fn with_tolerances(dim: usize, tol: Tolerances) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimensions("dimension must be positive".into()));
        }
        Ok(Self { dim, tol })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// The normalization constant `1/N` of `τ`.
    pub fn trace_weight(&self) -> f64 {
        1.0 / self.dim as f64
    }

    pub fn identity(&self) -> Operator {
        Operator::identity(*self)
    }

    pub fn zero(&self) -> Operator {
        Operator::zero(*self)
    }

    pub(crate) fn ensure_same(&self, other: &TracialContext) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ContextMismatch { left: self.dim, right: other.dim })
        }
    }
}
