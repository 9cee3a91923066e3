use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::TracialContext;
use crate::{spectral, CMatrix, Error, Result};

/// An element of `M_N`, bound to its [`TracialContext`].
///
/// Arithmetic through the `std::ops` traits panics on a context mismatch, in
/// the same way dense matrix libraries panic on shape mismatch. Fallible entry
/// points ([`Operator::new`], conditional expectations, truncations) report
/// [`Error::ContextMismatch`] instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    ctx: TracialContext,
    m: CMatrix,
}

impl Operator {
    pub fn new(ctx: TracialContext, m: CMatrix) -> Result<Self> {
        if m.nrows() != ctx.dim() || m.ncols() != ctx.dim() {
            return Err(Error::InvalidDimensions(format!(
                "expected {n}x{n} matrix, got {}x{}",
                m.nrows(),
                m.ncols(),
                n = ctx.dim()
            )));
        }
        Ok(Self { ctx, m })
    }

    pub(crate) fn from_matrix_unchecked(ctx: TracialContext, m: CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), ctx.dim());
        Self { ctx, m }
    }

    pub fn identity(ctx: TracialContext) -> Self {
        Self { ctx, m: CMatrix::identity(ctx.dim(), ctx.dim()) }
    }

    pub fn zero(ctx: TracialContext) -> Self {
        Self { ctx, m: CMatrix::zeros(ctx.dim(), ctx.dim()) }
    }

    /// Matrix unit `e_{ij}` (zero-based indices).
    pub fn matrix_unit(ctx: TracialContext, i: usize, j: usize) -> Result<Self> {
        let n = ctx.dim();
        if i >= n || j >= n {
            return Err(Error::InvalidDimensions(format!("matrix unit ({i},{j}) outside M_{n}")));
        }
        let mut m = CMatrix::zeros(n, n);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        Ok(Self { ctx, m })
    }

    pub fn diagonal(ctx: TracialContext, entries: &[f64]) -> Result<Self> {
        if entries.len() != ctx.dim() {
            return Err(Error::InvalidDimensions(format!("{} diagonal entries for M_{}", entries.len(), ctx.dim())));
        }
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            entries.len(),
            entries.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        Ok(Self { ctx, m })
    }

    /// Real matrix given row by row.
    pub fn from_real_rows(ctx: TracialContext, rows: &[&[f64]]) -> Result<Self> {
        let n = ctx.dim();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDimensions(format!("expected {n} rows of length {n}")));
        }
        let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0));
        Ok(Self { ctx, m })
    }

    pub fn context(&self) -> &TracialContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// Same entries, rebound to another context of the same dimension.
    pub fn with_context(self, ctx: TracialContext) -> Result<Self> {
        Self::new(ctx, self.m)
    }

    pub(crate) fn ensure_same(&self, other: &Operator) -> Result<()> {
        self.ctx.ensure_same(&other.ctx)
    }

    pub(crate) fn map_matrix(&self, f: impl FnOnce(&CMatrix) -> CMatrix) -> Self {
        Self { ctx: self.ctx, m: f(&self.m) }
    }

    pub fn adjoint(&self) -> Self {
        self.map_matrix(|m| m.adjoint())
    }

    /// Normalized trace `τ(x) = Tr(x) / N`.
    pub fn trace(&self) -> Complex64 {
        self.m.trace() * self.ctx.trace_weight()
    }

    /// Trace inner product `⟨a, b⟩ = τ(a* b)`.
    pub fn inner(&self, other: &Operator) -> Complex64 {
        self.m.dotc(&other.m) * self.ctx.trace_weight()
    }

    /// `‖x‖_2 = τ(x* x)^{1/2}`, computed without a decomposition.
    pub fn norm2(&self) -> f64 {
        self.m.norm() * self.ctx.trace_weight().sqrt()
    }

    /// Operator norm `‖x‖_∞`.
    pub fn norm_inf(&self) -> f64 {
        spectral::singular_values(self).first().copied().unwrap_or(0.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_matrix(|m| m.scale(c))
    }

    pub fn scale_complex(&self, c: Complex64) -> Self {
        self.map_matrix(|m| m * c)
    }

    /// `(x + x*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        self.map_matrix(|m| (m + m.adjoint()).scale(0.5))
    }

    /// The Hermitian `k` with `x = h + i k`, i.e. `(x - x*) / 2i`.
    pub fn imaginary_part(&self) -> Self {
        self.map_matrix(|m| (m - m.adjoint()) * Complex64::new(0.0, -0.5))
    }

    /// `|x|² = x* x`.
    pub fn abs_squared(&self) -> Self {
        self.map_matrix(|m| m.adjoint() * m)
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        self * other - other * self
    }

    /// Frobenius distance to `x*`, which dominates the operator-norm distance.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.m - self.m.adjoint()).norm()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= self.ctx.tolerances().hermiticity * (1.0 + self.m.norm())
    }

    /// Hermitian with spectrum bounded below by `-psd·(1+‖x‖_∞)`.
    pub fn is_positive(&self) -> bool {
        self.is_hermitian()
            && spectral::min_eigenvalue(self)
                .map(|v| v >= -self.ctx.tolerances().psd_scaled(self.norm_inf()))
                .unwrap_or(false)
    }

    /// Frobenius residual of `p² = p = p*`.
    pub fn projection_residual(&self) -> f64 {
        let sq = &self.m * &self.m - &self.m;
        sq.norm().max(self.hermiticity_residual())
    }

    pub fn is_projection(&self) -> bool {
        self.projection_residual() <= self.ctx.tolerances().projection
    }

    /// Entrywise maximum modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn to_json(&self) -> OperatorJson {
        OperatorJson::from(self)
    }
}

/// Wire format `{"n": N, "re": [[...]], "im": [[...]]}`, rows first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&Operator> for OperatorJson {
    fn from(x: &Operator) -> Self {
        let n = x.dim();
        let re = (0..n).map(|i| (0..n).map(|j| x.m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| x.m[(i, j)].im).collect()).collect();
        Self { n, re, im }
    }
}

impl OperatorJson {
    pub fn into_operator(self, ctx: TracialContext) -> Result<Operator> {
        let n = self.n;
        if n != ctx.dim() {
            return Err(Error::ContextMismatch { left: n, right: ctx.dim() });
        }
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::InvalidDimensions(format!("operator JSON is not {n}x{n}")));
        }
        let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(self.re[i][j], self.im[i][j]));
        Operator::new(ctx, m)
    }
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = OperatorJson::deserialize(d)?;
        let ctx = TracialContext::new(raw.n).map_err(serde::de::Error::custom)?;
        raw.into_operator(ctx).map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                assert_eq!(self.ctx, rhs.ctx, "operator context mismatch");
                Operator { ctx: self.ctx, m: &self.m $op &rhs.m }
            }
        }
        impl $trait<Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                &self $op &rhs
            }
        }
        impl $trait<&Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                &self $op rhs
            }
        }
        impl $trait<Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, c: f64) -> Operator {
        self.scale(c)
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, c: f64) -> Operator {
        self.scale(c)
    }
}

impl Mul<Complex64> for &Operator {
    type Output = Operator;
    fn mul(self, c: Complex64) -> Operator {
        self.scale_complex(c)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}
