//! A desk-scale laboratory for non-commutative martingales in the matrix
//! algebra `M_N` with normalized trace `τ = Tr / N`.
//!
//! The crate is organised bottom-up:
//!
//! * [`tracial`]: operators, unital *-subalgebras, conditional expectations
//!   and filtrations.
//! * [`spectral`]: Hermitian spectral calculus, singular value functions and
//!   the `L^p`, weak-`L^1` and `L log L` norms, plus projection meets.
//! * [`truncation`]: triangular truncation, diagonal part and the Hilbert-type
//!   operator relative to a family of orthogonal projections.
//! * [`martingale`]: martingale sequences, differences, square functions and
//!   Hardy norm estimates.
//! * [`cuculescu`]: Cuculescu projections, the dyadic disjoint families and a
//!   numerical replay of the weak-type estimates.
//! * [`decomposition`]: the column/row splitting `x = y + z` of a martingale.
//! * [`harness`]: seeded ensemble experiments behind the `ncmart` CLI.

pub mod cuculescu;
pub mod decomposition;
pub mod error;
pub mod harness;
pub mod martingale;
pub mod random;
pub mod spectral;
pub mod tolerance;
pub mod tracial;
pub mod truncation;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use tolerance::Tolerances;
pub use tracial::{Filtration, FiltrationDescriptor, Operator, Subalgebra, TracialContext};

/// Dense complex matrix backing every [`Operator`].
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
