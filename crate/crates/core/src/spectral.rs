//! Hermitian spectral calculus and the singular-value based norms.
//!
//! Spectra are clustered before any interval test: eigenvalues closer than
//! `cluster·(1+‖x‖_∞)` form a single eigenprojection, and interval endpoints
//! are compared at the same resolution.

use std::ops::Bound;

use serde::Serialize;

use crate::tracial::{Operator, TracialContext};
use crate::{CMatrix, Error, Result};

const EIGEN_MAX_ITER: usize = 1_000_000;
const ESCALATION: [f64; 3] = [1.0, 1e2, 1e4];

/// Eigenvalues (descending) and matching orthonormal eigenvectors of the
/// Hermitian part of `m`. The convergence threshold is escalated twice before
/// giving up with [`Error::NumericalBreakdown`].
pub(crate) fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let h = (m + m.adjoint()).scale(0.5);
    for factor in ESCALATION {
        if let Some(eig) = h.clone().try_symmetric_eigen(f64::EPSILON * factor, EIGEN_MAX_ITER) {
            let n = eig.eigenvalues.len();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
            return Ok((values, vectors));
        }
    }
    Err(Error::NumericalBreakdown("hermitian eigensolver did not converge".into()))
}

/// `Σ_{k ∈ selected} v_k v_k*` for eigenvector columns `v_k`.
fn span_projection(vectors: &CMatrix, selected: &[usize]) -> CMatrix {
    let n = vectors.nrows();
    if selected.is_empty() {
        return CMatrix::zeros(n, n);
    }
    let cols = vectors.select_columns(selected);
    &cols * cols.adjoint()
}

/// `Σ f(λ_k) v_k v_k*`.
fn spectral_map(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        let c = f(v);
        scaled.column_mut(k).scale_mut(c);
    }
    scaled * vectors.adjoint()
}

fn require_hermitian(x: &Operator) -> Result<()> {
    if x.is_hermitian() {
        Ok(())
    } else {
        Err(Error::NotHermitian { residual: x.hermiticity_residual() })
    }
}

/// Groups of consecutive (descending) eigenvalues within `tol` of a neighbour.
fn clusters(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k - 1] - values[k] > tol {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Distinct eigenvalues of a Hermitian operator with their eigenprojections.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    multiplicities: Vec<usize>,
    projections: Vec<Operator>,
}

impl SpectralDecomposition {
    pub fn new(x: &Operator) -> Result<Self> {
        require_hermitian(x)?;
        let (values, vectors) = eigh(x.matrix())?;
        let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let tol = x.context().tolerances().cluster_scaled(scale);
        let mut eigenvalues = Vec::new();
        let mut multiplicities = Vec::new();
        let mut projections = Vec::new();
        for r in clusters(&values, tol) {
            let idx: Vec<usize> = r.clone().collect();
            eigenvalues.push(values[r.clone()].iter().sum::<f64>() / r.len() as f64);
            multiplicities.push(r.len());
            projections.push(Operator::from_matrix_unchecked(*x.context(), span_projection(&vectors, &idx)));
        }
        Ok(Self { eigenvalues, multiplicities, projections })
    }

    /// Distinct eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn projections(&self) -> &[Operator] {
        &self.projections
    }

    /// `Σ λ_k P_k`.
    pub fn reconstruct(&self) -> Operator {
        let mut acc = self.projections[0].scale(self.eigenvalues[0]);
        for (l, p) in self.eigenvalues.iter().zip(&self.projections).skip(1) {
            acc = acc + p.scale(*l);
        }
        acc
    }
}

/// A real interval with independently open, closed or infinite ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: Bound<f64>,
    pub upper: Bound<f64>,
}

impl Interval {
    pub fn new(lower: Bound<f64>, upper: Bound<f64>) -> Self {
        Self { lower, upper }
    }

    /// `(a, ∞)`.
    pub fn above(a: f64) -> Self {
        Self::new(Bound::Excluded(a), Bound::Unbounded)
    }

    /// `(a, b]`.
    pub fn open_closed(a: f64, b: f64) -> Self {
        Self::new(Bound::Excluded(a), Bound::Included(b))
    }

    /// `(a, b)`.
    pub fn open(a: f64, b: f64) -> Self {
        Self::new(Bound::Excluded(a), Bound::Excluded(b))
    }

    /// Membership with endpoints compared at resolution `res`: a value within
    /// `res` of an endpoint counts as equal to it.
    pub fn contains(&self, v: f64, res: f64) -> bool {
        let lo = match self.lower {
            Bound::Unbounded => true,
            Bound::Included(a) => v >= a - res,
            Bound::Excluded(a) => v > a + res,
        };
        let hi = match self.upper {
            Bound::Unbounded => true,
            Bound::Included(b) => v <= b + res,
            Bound::Excluded(b) => v < b - res,
        };
        lo && hi
    }
}

/// `χ_B(x)` for Hermitian `x`. Whole clusters are kept or dropped, so the
/// result is an exact projection onto a span of eigenvectors.
pub fn spectral_projection(x: &Operator, interval: &Interval) -> Result<Operator> {
    require_hermitian(x)?;
    let (values, vectors) = eigh(x.matrix())?;
    let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let res = x.context().tolerances().cluster_scaled(scale);
    let mut selected = Vec::new();
    for r in clusters(&values, res) {
        let mean = values[r.clone()].iter().sum::<f64>() / r.len() as f64;
        if interval.contains(mean, res) {
            selected.extend(r);
        }
    }
    Ok(Operator::from_matrix_unchecked(*x.context(), span_projection(&vectors, &selected)))
}

/// Re-rounds a near-projection: the spectral projection of its Hermitian part
/// onto eigenvalues above 1/2.
pub fn snap_projection(p: &Operator) -> Result<Operator> {
    let (values, vectors) = eigh(p.matrix())?;
    let selected: Vec<usize> = (0..values.len()).filter(|&k| values[k] > 0.5).collect();
    Ok(Operator::from_matrix_unchecked(*p.context(), span_projection(&vectors, &selected)))
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(x: &Operator) -> Result<f64> {
    let (values, _) = eigh(x.matrix())?;
    Ok(values.last().copied().unwrap_or(0.0))
}

pub fn max_eigenvalue(x: &Operator) -> Result<f64> {
    let (values, _) = eigh(x.matrix())?;
    Ok(values.first().copied().unwrap_or(0.0))
}

/// Positive square root. Eigenvalues down to `-psd·(1+‖x‖_∞)` are clamped to
/// zero; anything more negative is rejected.
pub fn sqrt_psd(x: &Operator) -> Result<Operator> {
    require_hermitian(x)?;
    let (values, vectors) = eigh(x.matrix())?;
    let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min = values.last().copied().unwrap_or(0.0);
    if min < -x.context().tolerances().psd_scaled(scale) {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(Operator::from_matrix_unchecked(*x.context(), spectral_map(&values, &vectors, |v| v.max(0.0).sqrt())))
}

/// Jordan decomposition `x = x₊ − x₋` of a Hermitian operator. Eigenvalues
/// within `psd·(1+‖x‖_∞)` of zero are assigned to neither part.
pub fn jordan_parts(x: &Operator) -> Result<(Operator, Operator)> {
    require_hermitian(x)?;
    let (values, vectors) = eigh(x.matrix())?;
    let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let thr = x.context().tolerances().psd_scaled(scale);
    let pos = spectral_map(&values, &vectors, |v| if v > thr { v } else { 0.0 });
    let neg = spectral_map(&values, &vectors, |v| if v < -thr { -v } else { 0.0 });
    let ctx = *x.context();
    Ok((Operator::from_matrix_unchecked(ctx, pos), Operator::from_matrix_unchecked(ctx, neg)))
}

/// `|x| = (x* x)^{1/2}`.
pub fn modulus(x: &Operator) -> Result<Operator> {
    sqrt_psd(&x.abs_squared())
}

/// Singular values in descending order.
pub fn try_singular_values(x: &Operator) -> Result<Vec<f64>> {
    for factor in ESCALATION {
        if let Some(svd) = x.matrix().clone().try_svd(false, false, f64::EPSILON * factor, EIGEN_MAX_ITER) {
            let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            return Ok(s);
        }
    }
    let (values, _) = eigh(&x.abs_squared().into_matrix())?;
    Ok(values.into_iter().map(|v| v.max(0.0).sqrt()).collect())
}

/// Infallible variant used for tolerance scaling; falls back to the
/// Frobenius norm bound if the decomposition breaks down.
pub(crate) fn singular_values(x: &Operator) -> Vec<f64> {
    try_singular_values(x).unwrap_or_else(|_| vec![x.matrix().norm(); 1])
}

/// Step function `t ↦ μ_t(x)` on `[0, 1)`: the `k`-th singular value on
/// `[(k-1)/N, k/N)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularValueFunction {
    values: Vec<f64>,
}

impl SingularValueFunction {
    /// From singular values in any order.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Left ends `t_k = k/N` of the steps, `k = 0..N`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let n = self.dim() as f64;
        (0..self.dim()).map(|k| k as f64 / n).collect()
    }

    /// `μ_t` for `t ∈ [0, 1)`; zero for `t ≥ 1`.
    pub fn at(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.values.first().copied().unwrap_or(0.0);
        }
        let k = (t * self.dim() as f64).floor() as usize;
        self.values.get(k).copied().unwrap_or(0.0)
    }

    /// `τ(χ_{(s,∞)}(|x|))`.
    pub fn distribution(&self, s: f64) -> f64 {
        self.values.iter().filter(|&&v| v > s).count() as f64 / self.dim() as f64
    }

    /// Left limit of the distribution function at `s`, `τ(χ_{[s,∞)}(|x|))`.
    pub fn distribution_left(&self, s: f64) -> f64 {
        self.values.iter().filter(|&&v| v >= s).count() as f64 / self.dim() as f64
    }

    pub fn lp(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        if p.is_infinite() {
            return Ok(self.values.first().copied().unwrap_or(0.0));
        }
        let n = self.dim() as f64;
        let mean = self.values.iter().map(|v| v.powf(p)).sum::<f64>() / n;
        Ok(mean.powf(1.0 / p))
    }

    /// `sup_t t μ_t = max_k (k/N) s_k`.
    pub fn weak_l1(&self) -> f64 {
        let n = self.dim() as f64;
        self.values.iter().enumerate().map(|(k, s)| (k + 1) as f64 / n * s).fold(0.0, f64::max)
    }

    /// `sup_λ λ τ(χ_{(λ,∞)})`, attained as `λ` increases to a singular value.
    pub fn weak_l1_via_distribution(&self) -> f64 {
        self.values.iter().map(|&v| v * self.distribution_left(v)).fold(0.0, f64::max)
    }

    /// `∫_0^1 μ_t log(1/t) dt`, exact for the step function.
    pub fn llogl(&self) -> f64 {
        let g = |t: f64| if t <= 0.0 { 0.0 } else { t - t * t.ln() };
        let n = self.dim() as f64;
        self.values.iter().enumerate().map(|(k, s)| s * (g((k + 1) as f64 / n) - g(k as f64 / n))).sum()
    }

    /// CSV with header `t_k,s_k`: `s_k` is the value of `μ` on `[t_k, t_k + 1/N)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_k,s_k\n");
        for (t, s) in self.breakpoints().iter().zip(&self.values) {
            out.push_str(&format!("{t:.17e},{s:.17e}\n"));
        }
        out
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::InvalidArgument(format!("exponent p = {p} must lie in [1, ∞]")))
    } else {
        Ok(())
    }
}

pub fn singular_value_function(x: &Operator) -> Result<SingularValueFunction> {
    Ok(SingularValueFunction::from_values(try_singular_values(x)?))
}

/// `λ_s(x) = τ(χ_{(s,∞)}(|x|))`.
pub fn distribution(x: &Operator, s: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::InvalidArgument(format!("distribution level {s} must be non-negative")));
    }
    Ok(singular_value_function(x)?.distribution(s))
}

/// `‖x‖_p = τ(|x|^p)^{1/p}`; pass `f64::INFINITY` for the operator norm.
pub fn lp_norm(x: &Operator, p: f64) -> Result<f64> {
    check_p(p)?;
    singular_value_function(x)?.lp(p)
}

/// `‖x‖_{1,∞} = sup_t t μ_t(x)`.
pub fn weak_l1_norm(x: &Operator) -> Result<f64> {
    Ok(singular_value_function(x)?.weak_l1())
}

/// The same quasi-norm evaluated from the distribution function.
pub fn weak_l1_norm_via_distribution(x: &Operator) -> Result<f64> {
    Ok(singular_value_function(x)?.weak_l1_via_distribution())
}

pub fn llogl_norm(x: &Operator) -> Result<f64> {
    Ok(singular_value_function(x)?.llogl())
}

/// Projection onto the intersection of the ranges of `ps`: the spectral
/// projection of `Σ p_i` onto eigenvalues within `meet` of `|ps|`.
pub fn projection_meet(ps: &[Operator]) -> Result<Operator> {
    let first = ps.first().ok_or_else(|| Error::InvalidArgument("meet of an empty family".into()))?;
    let ctx: TracialContext = *first.context();
    for p in ps {
        ctx.ensure_same(p.context())?;
        if !p.is_projection() {
            return Err(Error::NotProjection { residual: p.projection_residual() });
        }
    }
    if ps.len() == 1 {
        return snap_projection(first);
    }
    let mut sum = first.matrix().clone();
    for p in &ps[1..] {
        sum += p.matrix();
    }
    let (values, vectors) = eigh(&sum)?;
    let threshold = ps.len() as f64 - ctx.tolerances().meet;
    let selected: Vec<usize> = (0..values.len()).filter(|&k| values[k] >= threshold).collect();
    Ok(Operator::from_matrix_unchecked(ctx, span_projection(&vectors, &selected)))
}

/// Both sides of the splitting inequality for distribution functions,
/// `λ_λ(a+b) ≤ α⁻¹ λ_{βλ}(a) + (1−α)⁻¹ λ_{(1−β)λ}(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

pub fn splitting_inequality_check(
    a: &Operator,
    b: &Operator,
    lambda: f64,
    alpha: f64,
    beta: f64,
) -> Result<SplittingReport> {
    a.ensure_same(b)?;
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!("λ = {lambda} must be positive")));
    }
    for (name, v) in [("α", alpha), ("β", beta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidArgument(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    let lhs = distribution(&(a + b), lambda)?;
    let rhs = distribution(a, beta * lambda)? / alpha + distribution(b, (1.0 - beta) * lambda)? / (1.0 - alpha);
    Ok(SplittingReport { lhs, rhs, pass: lhs <= rhs + 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn ctx(n: usize) -> TracialContext {
        TracialContext::new(n).unwrap()
    }

    fn diag(c: TracialContext, v: &[f64]) -> Operator {
        Operator::diagonal(c, v).unwrap()
    }

    #[test]
    fn jordan_parts_split_the_spectrum() {
        let c = ctx(3);
        let (p, n) = jordan_parts(&diag(c, &[2.0, -1.0, 0.0])).unwrap();
        assert!((p - diag(c, &[2.0, 0.0, 0.0])).max_abs() < 1e-14);
        assert!((n - diag(c, &[0.0, 1.0, 0.0])).max_abs() < 1e-14);
        let mut rng = random::rng_from_seed(4);
        let x = Operator::new(c, random::gue(&mut rng, 3)).unwrap();
        let (p, n) = jordan_parts(&x).unwrap();
        assert!((&p - &n - &x).max_abs() < 1e-12);
        assert!((&p * &n).max_abs() < 1e-12);
    }

    #[test]
    fn spectral_projection_examples() {
        let c = ctx(2);
        let x = diag(c, &[2.0, 0.0]);
        let p = spectral_projection(&x, &Interval::above(1.0)).unwrap();
        assert!((p - diag(c, &[1.0, 0.0])).max_abs() < 1e-14);
        let p = spectral_projection(&x, &Interval::above(3.0)).unwrap();
        assert!(p.max_abs() < 1e-15);
        let p = spectral_projection(&c.identity(), &Interval::open(0.5, 2.0)).unwrap();
        assert!((p - c.identity()).max_abs() < 1e-14);
    }

    #[test]
    fn endpoints_follow_half_open_semantics() {
        let c = ctx(2);
        let x = diag(c, &[2.0, 0.0]);
        // 2 ∈ (0, 2] but 2 ∉ (2, ∞); 0 ∉ (0, 2].
        let low = spectral_projection(&x, &Interval::open_closed(0.0, 2.0)).unwrap();
        assert!((low - diag(c, &[1.0, 0.0])).max_abs() < 1e-14);
        let high = spectral_projection(&x, &Interval::above(2.0)).unwrap();
        assert!(high.max_abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let c = ctx(2);
        let x = Operator::matrix_unit(c, 0, 1).unwrap();
        assert!(matches!(spectral_projection(&x, &Interval::above(0.0)), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn degenerate_spectrum_forms_one_cluster() {
        let c = ctx(3);
        let x = diag(c, &[1.0, 1.0 + 1e-12, 0.0]);
        let sd = SpectralDecomposition::new(&x).unwrap();
        assert_eq!(sd.multiplicities(), &[2, 1]);
        assert!((sd.reconstruct() - x).max_abs() < 1e-10);
    }

    #[test]
    fn singular_value_function_examples() {
        let c = ctx(2);
        let f = singular_value_function(&diag(c, &[3.0, 1.0])).unwrap();
        assert_eq!(f.at(0.0), 3.0);
        assert_eq!(f.at(0.49), 3.0);
        assert_eq!(f.at(0.5), 1.0);
        assert_eq!(f.at(0.99), 1.0);
        let f = singular_value_function(&c.identity()).unwrap();
        assert!(f.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let f = singular_value_function(&c.zero()).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn distribution_examples() {
        let c = ctx(2);
        let x = diag(c, &[3.0, 1.0]);
        assert_eq!(distribution(&x, 2.0).unwrap(), 0.5);
        assert_eq!(distribution(&x, 3.0).unwrap(), 0.0);
        assert_eq!(distribution(&c.identity(), 0.5).unwrap(), 1.0);
        assert!(distribution(&x, -1.0).is_err());
    }

    #[test]
    fn lp_examples() {
        let c = ctx(2);
        let x = diag(c, &[3.0, 1.0]);
        assert!((lp_norm(&x, 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((lp_norm(&x, f64::INFINITY).unwrap() - 3.0).abs() < 1e-14);
        assert!(lp_norm(&x, 0.5).is_err());
        let mut rng = random::rng_from_seed(4);
        let u = Operator::new(ctx(5), random::haar_unitary(&mut rng, 5)).unwrap();
        for p in [1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            assert!((lp_norm(&u, p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weak_l1_examples() {
        let c = ctx(2);
        assert!((weak_l1_norm(&diag(c, &[3.0, 1.0])).unwrap() - 1.5).abs() < 1e-14);
        assert!((weak_l1_norm(&c.identity()).unwrap() - 1.0).abs() < 1e-14);
        let c4 = ctx(4);
        let p = diag(c4, &[1.0, 0.0, 1.0, 0.0]);
        assert!((weak_l1_norm(&p).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn llogl_examples() {
        let c = ctx(2);
        assert!((llogl_norm(&c.identity()).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(llogl_norm(&c.zero()).unwrap(), 0.0);
        let g_half = 0.5 + 2f64.ln() / 2.0;
        let want = 3.0 * g_half + (1.0 - g_half);
        let got = llogl_norm(&diag(c, &[3.0, 1.0])).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!((got - 2.693_147_180_559_945).abs() < 1e-12);
    }

    #[test]
    fn meet_examples() {
        let c = ctx(3);
        let p = diag(c, &[1.0, 1.0, 0.0]);
        let q = diag(c, &[0.0, 1.0, 1.0]);
        let m = projection_meet(&[p.clone(), q]).unwrap();
        assert!((m - diag(c, &[0.0, 1.0, 0.0])).max_abs() < 1e-12);
        let m = projection_meet(&[p.clone(), p.clone()]).unwrap();
        assert!((m - &p).max_abs() < 1e-12);
        let e1 = diag(c, &[1.0, 0.0, 0.0]);
        let e2 = diag(c, &[0.0, 1.0, 0.0]);
        assert!(projection_meet(&[e1, e2]).unwrap().max_abs() < 1e-12);
        assert!(projection_meet(&[diag(c, &[2.0, 0.0, 0.0])]).is_err());
        assert!(projection_meet(&[]).is_err());
    }

    #[test]
    fn splitting_examples() {
        let c = ctx(2);
        let a = diag(c, &[2.0, 0.0]);
        let r = splitting_inequality_check(&a, &a, 3.0, 0.5, 0.5).unwrap();
        assert_eq!(r.lhs, 0.5);
        assert_eq!(r.rhs, 2.0);
        assert!(r.pass);
        let r = splitting_inequality_check(&a, &c.zero(), 1.0, 0.5, 0.5).unwrap();
        assert!(r.pass);
        assert!(splitting_inequality_check(&a, &a, 0.0, 0.5, 0.5).is_err());
        assert!(splitting_inequality_check(&a, &a, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn sqrt_rejects_negative_spectrum() {
        let c = ctx(2);
        assert!(sqrt_psd(&diag(c, &[1.0, -0.5])).is_err());
        let r = sqrt_psd(&diag(c, &[4.0, -1e-14])).unwrap();
        assert!((r - diag(c, &[2.0, 0.0])).max_abs() < 1e-12);
    }

    #[test]
    fn csv_has_one_row_per_step() {
        let c = ctx(2);
        let csv = singular_value_function(&diag(c, &[3.0, 1.0])).unwrap().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "t_k,s_k");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("5.0"));
    }
}
