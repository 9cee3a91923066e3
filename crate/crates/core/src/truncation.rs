//! Triangular truncation `T`, diagonal part `D` and the Hilbert-type operator
//! `H` relative to an ordered family of mutually orthogonal projections.
//!
//! `H` is built from the strict parts, `H(x) = −i(U(x) − L(x))` with
//! `U(x) = Σ_{i<j} p_i x p_j` and `L(x) = Σ_{i>j} p_i x p_j`. With this
//! definition `H` maps Hermitian operators to Hermitian operators, `D∘H = 0`
//! and `x + iH(x) = 2T(x) − D(x)` for Hermitian `x`. The literal
//! `−i(T(x) − T(x*))` is kept as [`hilbert_op_literal`] for comparison; it
//! vanishes on Hermitian operators.

use num_complex::Complex64;
use serde::Serialize;

use crate::spectral;
use crate::tracial::{Operator, TracialContext};
use crate::{Error, Result};

/// Ordered list `p_1, …, p_M` of mutually orthogonal projections.
#[derive(Debug, Clone)]
pub struct ProjectionFamily {
    ctx: TracialContext,
    projections: Vec<Operator>,
    /// `prefix[j] = Σ_{i ≤ j} p_i`.
    prefix: Vec<Operator>,
    complete: bool,
}

impl ProjectionFamily {
    /// Validates projection and orthogonality residuals against the context
    /// tolerance and records whether the family sums to the identity.
    pub fn new(ctx: TracialContext, projections: Vec<Operator>) -> Result<Self> {
        let tol = ctx.tolerances().projection;
        for p in &projections {
            ctx.ensure_same(p.context())?;
            if !p.is_projection() {
                return Err(Error::NotProjection { residual: p.projection_residual() });
            }
        }
        for (i, p) in projections.iter().enumerate() {
            for q in &projections[i + 1..] {
                let r = (p * q).matrix().norm();
                if r > tol {
                    return Err(Error::InvalidArgument(format!(
                        "projections are not mutually orthogonal (residual {r:.3e})"
                    )));
                }
            }
        }
        Ok(Self::from_parts(ctx, projections))
    }

    pub(crate) fn from_parts(ctx: TracialContext, projections: Vec<Operator>) -> Self {
        let mut prefix = Vec::with_capacity(projections.len());
        let mut acc = ctx.zero();
        for p in &projections {
            acc = acc + p;
            prefix.push(acc.clone());
        }
        let complete = (&acc - ctx.identity()).matrix().norm() <= ctx.tolerances().projection;
        Self { ctx, projections, prefix, complete }
    }

    /// The family `{1}`.
    pub fn trivial(ctx: TracialContext) -> Self {
        Self::from_parts(ctx, vec![ctx.identity()])
    }

    pub fn context(&self) -> &TracialContext {
        &self.ctx
    }

    pub fn projections(&self) -> &[Operator] {
        &self.projections
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// The first `m` projections as a (generally incomplete) family.
    pub fn truncated(&self, m: usize) -> Self {
        Self::from_parts(self.ctx, self.projections[..m.min(self.len())].to_vec())
    }

    fn check(&self, x: &Operator) -> Result<()> {
        self.ctx.ensure_same(x.context())
    }
}

/// `T(x) = Σ_j Σ_{i≤j} p_i x p_j`, evaluated as `Σ_j (Σ_{i≤j} p_i) x p_j`.
pub fn triangular_truncate(family: &ProjectionFamily, x: &Operator) -> Result<Operator> {
    family.check(x)?;
    let mut acc = family.ctx.zero();
    for (pre, p) in family.prefix.iter().zip(&family.projections) {
        acc = acc + pre * x * p;
    }
    Ok(acc)
}

/// `U(x) = Σ_{i<j} p_i x p_j`.
pub fn strict_upper(family: &ProjectionFamily, x: &Operator) -> Result<Operator> {
    family.check(x)?;
    let mut acc = family.ctx.zero();
    for j in 1..family.len() {
        acc = acc + &family.prefix[j - 1] * x * &family.projections[j];
    }
    Ok(acc)
}

/// `L(x) = Σ_{i>j} p_i x p_j`.
pub fn strict_lower(family: &ProjectionFamily, x: &Operator) -> Result<Operator> {
    family.check(x)?;
    let mut acc = family.ctx.zero();
    for i in 1..family.len() {
        acc = acc + &family.projections[i] * x * &family.prefix[i - 1];
    }
    Ok(acc)
}

/// `D(x) = Σ_i p_i x p_i`.
pub fn diagonal_part(family: &ProjectionFamily, x: &Operator) -> Result<Operator> {
    family.check(x)?;
    let mut acc = family.ctx.zero();
    for p in &family.projections {
        acc = acc + p * x * p;
    }
    Ok(acc)
}

/// `H(x) = −i(U(x) − L(x))`.
pub fn hilbert_op(family: &ProjectionFamily, x: &Operator) -> Result<Operator> {
    let diff = strict_upper(family, x)? - strict_lower(family, x)?;
    Ok(diff.scale_complex(Complex64::new(0.0, -1.0)))
}

/// `−i(T(x) − T(x*))`, taken at face value.
pub fn hilbert_op_literal(family: &ProjectionFamily, x: &Operator) -> Result<Operator> {
    let diff = triangular_truncate(family, x)? - triangular_truncate(family, &x.adjoint())?;
    Ok(diff.scale_complex(Complex64::new(0.0, -1.0)))
}

/// Weak-type bound for a sum of squared truncations of positive operators:
/// `‖(Σ_n |T_n x_n|²)^{1/2}‖_{1,∞}` against `5√2 Σ_n ‖x_n‖_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakTruncationReport {
    pub weak_norm: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

pub const TRUNCATION_WEAK_CONSTANT: f64 = 5.0 * std::f64::consts::SQRT_2;

pub fn truncation_weak_bound(xs: &[Operator], families: &[ProjectionFamily]) -> Result<WeakTruncationReport> {
    if xs.len() != families.len() {
        return Err(Error::InvalidArgument(format!("{} operators but {} families", xs.len(), families.len())));
    }
    let first = xs.first().ok_or_else(|| Error::InvalidArgument("no operators supplied".into()))?;
    let ctx = *first.context();
    let mut sum = ctx.zero();
    let mut l1 = 0.0;
    for (x, fam) in xs.iter().zip(families) {
        ctx.ensure_same(x.context())?;
        if !x.is_positive() {
            let min_eigenvalue = spectral::min_eigenvalue(x)?;
            return Err(Error::NotPositive { min_eigenvalue });
        }
        let t = triangular_truncate(fam, x)?;
        sum = sum + t.abs_squared();
        l1 += x.trace().re;
    }
    let q = spectral::sqrt_psd(&sum.hermitian_part())?;
    let weak_norm = spectral::weak_l1_norm(&q)?;
    let bound = TRUNCATION_WEAK_CONSTANT * l1;
    let ratio = if bound > 0.0 {
        weak_norm / bound
    } else if weak_norm == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(WeakTruncationReport { weak_norm, bound, ratio, pass: ratio <= 1.0 + 1e-9 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: usize) -> TracialContext {
        TracialContext::new(n).unwrap()
    }

    fn units(c: TracialContext) -> ProjectionFamily {
        let ps = (0..c.dim()).map(|i| Operator::matrix_unit(c, i, i).unwrap()).collect();
        ProjectionFamily::new(c, ps).unwrap()
    }

    fn x22() -> Operator {
        Operator::from_real_rows(ctx(2), &[&[1.0, 2.0], &[3.0, 4.0]]).unwrap()
    }

    #[test]
    fn truncation_keeps_upper_triangle_and_diagonal() {
        let x = x22();
        let t = triangular_truncate(&units(ctx(2)), &x).unwrap();
        let want = Operator::from_real_rows(ctx(2), &[&[1.0, 2.0], &[0.0, 4.0]]).unwrap();
        assert!((t - want).max_abs() < 1e-15);
    }

    #[test]
    fn trivial_family_is_the_identity_map() {
        let x = x22();
        let fam = ProjectionFamily::trivial(ctx(2));
        assert_eq!(triangular_truncate(&fam, &x).unwrap(), x);
        assert_eq!(diagonal_part(&fam, &x).unwrap(), x);
    }

    #[test]
    fn block_truncation_in_m3() {
        let c = ctx(3);
        let p1 = Operator::diagonal(c, &[1.0, 1.0, 0.0]).unwrap();
        let p2 = Operator::diagonal(c, &[0.0, 0.0, 1.0]).unwrap();
        let fam = ProjectionFamily::new(c, vec![p1, p2]).unwrap();
        let rows: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| (3 * i + j + 1) as f64).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let x = Operator::from_real_rows(c, &refs).unwrap();
        let t = triangular_truncate(&fam, &x).unwrap();
        let want = Operator::from_real_rows(c, &[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[0.0, 0.0, 9.0]]).unwrap();
        assert!((t - want).max_abs() < 1e-14);
    }

    #[test]
    fn diagonal_part_example() {
        let d = diagonal_part(&units(ctx(2)), &x22()).unwrap();
        assert!((d - Operator::diagonal(ctx(2), &[1.0, 4.0]).unwrap()).max_abs() < 1e-15);
    }

    #[test]
    fn hilbert_examples() {
        let c = ctx(2);
        let fam = units(c);
        let x = Operator::from_real_rows(c, &[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let h = hilbert_op(&fam, &x).unwrap();
        assert!((h.matrix()[(0, 1)] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((h.matrix()[(1, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let d = Operator::diagonal(c, &[2.0, -1.0]).unwrap();
        assert!(hilbert_op(&fam, &d).unwrap().max_abs() < 1e-15);
        // The literal form is identically zero on Hermitian input.
        assert!(hilbert_op_literal(&fam, &x).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn family_validation() {
        let c = ctx(2);
        let p = Operator::diagonal(c, &[1.0, 0.0]).unwrap();
        assert!(ProjectionFamily::new(c, vec![p.clone(), p.clone()]).is_err());
        assert!(ProjectionFamily::new(c, vec![c.identity().scale(2.0)]).is_err());
        let fam = ProjectionFamily::new(c, vec![p]).unwrap();
        assert!(!fam.is_complete());
        assert!(units(c).is_complete());
        let other = ctx(3).identity();
        assert!(triangular_truncate(&fam, &other).is_err());
    }

    #[test]
    fn weak_bound_examples() {
        let c = ctx(2);
        let ones = Operator::from_real_rows(c, &[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let r = truncation_weak_bound(&[ones], &[units(c)]).unwrap();
        // |Tx|² = [[1,1],[1,2]] has eigenvalues (3 ± √5)/2.
        let s1 = ((3.0 + 5f64.sqrt()) / 2.0).sqrt();
        let s2 = ((3.0 - 5f64.sqrt()) / 2.0).sqrt();
        let weak = (0.5 * s1).max(s2);
        assert!((r.weak_norm - weak).abs() < 1e-12);
        assert!((r.bound - TRUNCATION_WEAK_CONSTANT).abs() < 1e-12);
        assert!(r.pass);

        let d = Operator::diagonal(c, &[3.0, 1.0]).unwrap();
        let r = truncation_weak_bound(&[d], &[units(c)]).unwrap();
        assert!((r.weak_norm - 1.5).abs() < 1e-12);
        assert!(r.ratio <= 1.0 / TRUNCATION_WEAK_CONSTANT + 1e-12);

        let neg = Operator::diagonal(c, &[1.0, -1.0]).unwrap();
        assert!(truncation_weak_bound(&[neg], &[units(c)]).is_err());
        assert!(truncation_weak_bound(&[], &[]).is_err());
    }
}
