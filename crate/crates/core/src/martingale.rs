//! Finite martingales over a [`Filtration`], their difference sequences,
//! column and row square functions and Hardy-norm estimates.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::random;
use crate::spectral;
use crate::tracial::{Filtration, FiltrationDescriptor, Operator, OperatorJson};
use crate::{Error, Result};

/// Which square function: `Σ|a_n|²` (column) or `Σ|a_n*|²` (row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Column,
    Row,
}

/// Norm applied to a square function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Lp(f64),
    WeakL1,
}

impl NormKind {
    pub fn apply(&self, x: &Operator) -> Result<f64> {
        match *self {
            NormKind::Lp(p) => spectral::lp_norm(x, p),
            NormKind::WeakL1 => spectral::weak_l1_norm(x),
        }
    }
}

fn adaptation_tol(f: &Filtration, x: &Operator) -> f64 {
    f.context().tolerances().span_residual * (1.0 + x.norm_inf())
}

/// `x_1, …, x_T` with `E_n(x_{n+1}) = x_n`.
#[derive(Debug, Clone)]
pub struct MartingaleSequence {
    filtration: Arc<Filtration>,
    terms: Vec<Operator>,
    positive: bool,
}

impl MartingaleSequence {
    /// Validates adaptedness and the martingale property in operator norm.
    pub fn new(filtration: Arc<Filtration>, terms: Vec<Operator>) -> Result<Self> {
        if terms.len() != filtration.depth() {
            return Err(Error::InvalidArgument(format!(
                "{} terms for a filtration of depth {}",
                terms.len(),
                filtration.depth()
            )));
        }
        for (k, x) in terms.iter().enumerate() {
            filtration.context().ensure_same(x.context())?;
            let n = k + 1;
            let tol = adaptation_tol(&filtration, x);
            let r = (filtration.expectation(n, x)? - x).norm_inf();
            if r > tol {
                return Err(Error::NotMartingale(format!("x_{n} is not in level {n} (residual {r:.3e})")));
            }
            if n >= 2 {
                let r = (filtration.expectation(n - 1, x)? - &terms[k - 1]).norm_inf();
                if r > tol {
                    return Err(Error::NotMartingale(format!("E_{}(x_{n}) != x_{} (residual {r:.3e})", n - 1, n - 1)));
                }
            }
        }
        Ok(Self::from_parts(filtration, terms))
    }

    fn from_parts(filtration: Arc<Filtration>, terms: Vec<Operator>) -> Self {
        let positive = terms.iter().all(Operator::is_positive);
        Self { filtration, terms, positive }
    }

    /// `x_n = E_n(x_inf)`.
    pub fn from_final(filtration: Arc<Filtration>, x_inf: &Operator) -> Result<Self> {
        filtration.context().ensure_same(x_inf.context())?;
        let terms = (1..=filtration.depth()).map(|n| filtration.expectation(n, x_inf)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(filtration, terms))
    }

    pub fn filtration(&self) -> &Arc<Filtration> {
        &self.filtration
    }

    pub fn terms(&self) -> &[Operator] {
        &self.terms
    }

    /// One-based.
    pub fn term(&self, n: usize) -> Option<&Operator> {
        n.checked_sub(1).and_then(|k| self.terms.get(k))
    }

    pub fn last(&self) -> &Operator {
        self.terms.last().expect("filtrations have at least one level")
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    /// `sup_n ‖x_n‖_p`, computed literally.
    pub fn norm(&self, p: f64) -> Result<f64> {
        let mut best: f64 = 0.0;
        for x in &self.terms {
            best = best.max(spectral::lp_norm(x, p)?);
        }
        Ok(best)
    }

    pub fn differences(&self) -> DifferenceSequence {
        let mut diffs = Vec::with_capacity(self.len());
        let mut prev = self.filtration.context().zero();
        for x in &self.terms {
            diffs.push(x - &prev);
            prev = x.clone();
        }
        DifferenceSequence { filtration: self.filtration.clone(), diffs }
    }

    /// Requires a filtration with a descriptor.
    pub fn to_json(&self) -> Result<MartingaleJson> {
        let filtration = self
            .filtration
            .descriptor()
            .cloned()
            .ok_or_else(|| Error::InvalidArgument("filtration has no descriptor".into()))?;
        Ok(MartingaleJson { filtration, x_inf: self.last().to_json() })
    }

    pub fn from_json(json: &MartingaleJson) -> Result<Self> {
        let f = Arc::new(json.filtration.build()?);
        let x = json.x_inf.clone().into_operator(*f.context())?;
        Self::from_final(f, &x)
    }
}

/// Serialized form: the filtration descriptor and the final term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleJson {
    pub filtration: FiltrationDescriptor,
    pub x_inf: OperatorJson,
}

/// `dx_1, …, dx_T` with the convention `x_0 = 0`.
#[derive(Debug, Clone)]
pub struct DifferenceSequence {
    filtration: Arc<Filtration>,
    diffs: Vec<Operator>,
}

impl DifferenceSequence {
    /// Validates `dx_n ∈ S_n` and `E_{n-1}(dx_n) = 0`.
    pub fn new(filtration: Arc<Filtration>, diffs: Vec<Operator>) -> Result<Self> {
        if diffs.len() != filtration.depth() {
            return Err(Error::InvalidArgument(format!(
                "{} differences for a filtration of depth {}",
                diffs.len(),
                filtration.depth()
            )));
        }
        for (k, d) in diffs.iter().enumerate() {
            filtration.context().ensure_same(d.context())?;
            let n = k + 1;
            let tol = adaptation_tol(&filtration, d);
            let r = (filtration.expectation(n, d)? - d).norm_inf();
            if r > tol {
                return Err(Error::NotMartingale(format!("dx_{n} is not in level {n} (residual {r:.3e})")));
            }
            if n >= 2 {
                let r = filtration.expectation(n - 1, d)?.norm_inf();
                if r > tol {
                    return Err(Error::NotMartingale(format!("E_{}(dx_{n}) = {r:.3e}", n - 1)));
                }
            }
        }
        Ok(Self { filtration, diffs })
    }

    pub(crate) fn from_parts(filtration: Arc<Filtration>, diffs: Vec<Operator>) -> Self {
        Self { filtration, diffs }
    }

    pub fn filtration(&self) -> &Arc<Filtration> {
        &self.filtration
    }

    pub fn diffs(&self) -> &[Operator] {
        &self.diffs
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    /// Partial sums `x_n = Σ_{k≤n} dx_k`.
    pub fn martingale(&self) -> MartingaleSequence {
        let mut terms = Vec::with_capacity(self.len());
        let mut acc = self.filtration.context().zero();
        for d in &self.diffs {
            acc = acc + d;
            terms.push(acc.clone());
        }
        MartingaleSequence::from_parts(self.filtration.clone(), terms)
    }

    /// `Σ_{k≤upto} |dx_k|²` or `Σ_{k≤upto} |dx_k*|²`.
    pub fn square_sum(&self, side: Side, upto: usize) -> Result<Operator> {
        if upto == 0 || upto > self.len() {
            return Err(Error::InvalidArgument(format!("upto = {upto} outside 1..={}", self.len())));
        }
        let mut acc = self.filtration.context().zero();
        for d in &self.diffs[..upto] {
            acc = acc
                + match side {
                    Side::Column => d.abs_squared(),
                    Side::Row => d.adjoint().abs_squared(),
                };
        }
        Ok(acc.hermitian_part())
    }

    /// `S_{C,upto}` or `S_{R,upto}`.
    pub fn square_function(&self, side: Side, upto: usize) -> Result<Operator> {
        spectral::sqrt_psd(&self.square_sum(side, upto)?)
    }

    /// Norm of the full square function.
    pub fn sequence_norm(&self, side: Side, norm: NormKind) -> Result<f64> {
        if let NormKind::Lp(p) = norm {
            if p.is_nan() || p < 1.0 {
                return Err(Error::InvalidArgument(format!("p = {p} must lie in [1, ∞]")));
            }
        }
        norm.apply(&self.square_function(side, self.len())?)
    }
}

/// A candidate splitting `dx = dy + dz` for the Hardy-norm infimum.
#[derive(Debug, Clone)]
pub struct HardyCandidate {
    pub label: String,
    pub column: DifferenceSequence,
    pub row: DifferenceSequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HardyValueKind {
    /// Exact value of the max-form norm.
    Norm,
    /// Minimum over a finite candidate set.
    UpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyReport {
    pub p: f64,
    pub value: f64,
    pub kind: HardyValueKind,
    pub attained_by: String,
    pub column_norm: f64,
    pub row_norm: f64,
}

/// `‖x‖_{H^p}`. For `p ≥ 2` the exact `max{‖S_C‖_p, ‖S_R‖_p}`; for
/// `1 ≤ p < 2` the minimum of `‖S_C(y)‖_p + ‖S_R(z)‖_p` over the candidates
/// together with `(x, 0)` and `(0, x)`.
pub fn hardy_norm(x: &MartingaleSequence, p: f64, candidates: &[HardyCandidate]) -> Result<HardyReport> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("p = {p} must be at least 1")));
    }
    let dx = x.differences();
    let norm = NormKind::Lp(p);
    let col = dx.sequence_norm(Side::Column, norm)?;
    let row = dx.sequence_norm(Side::Row, norm)?;
    if p >= 2.0 {
        let (value, attained_by) = if col >= row { (col, "column") } else { (row, "row") };
        return Ok(HardyReport {
            p,
            value,
            kind: HardyValueKind::Norm,
            attained_by: attained_by.into(),
            column_norm: col,
            row_norm: row,
        });
    }
    let mut best = HardyReport {
        p,
        value: col,
        kind: HardyValueKind::UpperBound,
        attained_by: "column_only".into(),
        column_norm: col,
        row_norm: 0.0,
    };
    if row < best.value {
        best.value = row;
        best.attained_by = "row_only".into();
        best.column_norm = 0.0;
        best.row_norm = row;
    }
    for c in candidates {
        if c.column.len() != dx.len() || c.row.len() != dx.len() {
            return Err(Error::InvalidArgument(format!("candidate {} has the wrong length", c.label)));
        }
        for (k, d) in dx.diffs().iter().enumerate() {
            let r = (&c.column.diffs()[k] + &c.row.diffs()[k] - d).norm_inf();
            if r > adaptation_tol(x.filtration(), d) {
                return Err(Error::InvalidArgument(format!(
                    "candidate {} does not sum to the martingale at n = {} (residual {r:.3e})",
                    c.label,
                    k + 1
                )));
            }
        }
        let cn = c.column.sequence_norm(Side::Column, norm)?;
        let rn = c.row.sequence_norm(Side::Row, norm)?;
        if cn + rn < best.value {
            best.value = cn + rn;
            best.attained_by = c.label.clone();
            best.column_norm = cn;
            best.row_norm = rn;
        }
    }
    Ok(best)
}

/// Whether `x_n − E_n(x_{n+1}) ≥ 0` for every `n`, up to the PSD tolerance.
/// `terms` need not be a martingale but must be Hermitian.
pub fn is_supermartingale(filtration: &Filtration, terms: &[Operator]) -> Result<bool> {
    let gap = supermartingale_gap(filtration, terms)?;
    Ok(gap.violation <= gap.tolerance)
}

/// `violation = max_n max(0, −λ_min(x_n − E_n(x_{n+1})))` and the tolerance it
/// is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupermartingaleGap {
    pub violation: f64,
    pub tolerance: f64,
}

pub fn supermartingale_gap(filtration: &Filtration, terms: &[Operator]) -> Result<SupermartingaleGap> {
    let mut top: f64 = 0.0;
    for x in terms {
        filtration.context().ensure_same(x.context())?;
        if !x.is_hermitian() {
            return Err(Error::NotHermitian { residual: x.hermiticity_residual() });
        }
        top = top.max(x.norm_inf());
    }
    let mut violation: f64 = 0.0;
    for (k, pair) in terms.windows(2).enumerate() {
        let gap = (&pair[0] - filtration.expectation(k + 1, &pair[1])?).hermitian_part();
        violation = violation.max(-spectral::min_eigenvalue(&gap)?);
    }
    let tolerance = filtration.context().tolerances().psd * (1.0 + 2.0 * top);
    Ok(SupermartingaleGap { violation, tolerance })
}

/// Positive matrix ensembles used to draw final terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// `G*G` with `G` standard complex Gaussian.
    Wishart,
    /// Exponential spectrum with one large spike, in a Haar-random basis.
    Spiky,
}

/// Final term `x_inf ≥ 0` from `ensemble`, scaled so that `τ(x_inf) = norm1`.
pub fn random_positive_final(filtration: &Filtration, ensemble: Ensemble, seed: u64, norm1: f64) -> Result<Operator> {
    if !(norm1 > 0.0 && norm1.is_finite()) {
        return Err(Error::InvalidArgument(format!("norm1 = {norm1} must be positive")));
    }
    let ctx = *filtration.context();
    let mut rng = random::rng_from_seed(seed);
    let m = match ensemble {
        Ensemble::Wishart => random::wishart(&mut rng, ctx.dim()),
        Ensemble::Spiky => random::spiky_psd(&mut rng, ctx.dim()),
    };
    let x = Operator::from_matrix_unchecked(ctx, m).hermitian_part();
    let t = x.trace().re;
    Ok(x.scale(norm1 / t))
}

/// Wishart positive martingale with `‖x_n‖_1 = norm1`.
pub fn random_positive_martingale(filtration: Arc<Filtration>, seed: u64, norm1: f64) -> Result<MartingaleSequence> {
    random_martingale(filtration, Ensemble::Wishart, seed, norm1)
}

pub fn random_martingale(
    filtration: Arc<Filtration>,
    ensemble: Ensemble,
    seed: u64,
    norm1: f64,
) -> Result<MartingaleSequence> {
    let x = random_positive_final(&filtration, ensemble, seed, norm1)?;
    MartingaleSequence::from_final(filtration, &x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracial::{Subalgebra, TracialContext};

    fn tensor4() -> Arc<Filtration> {
        let ctx = TracialContext::new(4).unwrap();
        Arc::new(Filtration::tensor(ctx, 2).unwrap())
    }

    #[test]
    fn identity_gives_constant_sequence() {
        let f = tensor4();
        let x = MartingaleSequence::from_final(f.clone(), &f.context().identity()).unwrap();
        for t in x.terms() {
            assert!((t - f.context().identity()).max_abs() < 1e-14);
        }
        let dx = x.differences();
        assert!((dx.diffs()[0].clone() - f.context().identity()).max_abs() < 1e-14);
        assert!(dx.diffs()[1].max_abs() < 1e-14);
    }

    #[test]
    fn partial_trace_example() {
        let f = tensor4();
        let ctx = *f.context();
        let e = Operator::matrix_unit(ctx, 0, 0).unwrap();
        let x = MartingaleSequence::from_final(f, &e).unwrap();
        // e_11 ⊗ 1 / 2 = diag(1/2, 1/2, 0, 0).
        let want = Operator::diagonal(ctx, &[0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!((x.terms()[0].clone() - want).max_abs() < 1e-14);
        assert!(x.is_positive());
    }

    #[test]
    fn differences_are_orthogonal_and_telescope() {
        let ctx = TracialContext::new(8).unwrap();
        let f = Arc::new(Filtration::tensor(ctx, 3).unwrap());
        let x = random_positive_martingale(f, 5, 1.0).unwrap();
        let dx = x.differences();
        DifferenceSequence::new(dx.filtration().clone(), dx.diffs().to_vec()).unwrap();
        let back = dx.martingale();
        for (a, b) in back.terms().iter().zip(x.terms()) {
            assert!((a - b).max_abs() < 1e-12);
        }
        for m in 0..3 {
            for n in 0..3 {
                if m != n {
                    assert!(dx.diffs()[m].inner(&dx.diffs()[n]).norm() < 1e-10);
                }
            }
        }
        let s = dx.square_function(Side::Column, 3).unwrap();
        assert!((s.norm2().powi(2) - x.last().norm2().powi(2)).abs() < 1e-9);
        for t in x.terms() {
            assert!((t.trace().re - 1.0).abs() < 1e-12);
            assert!(t.is_positive());
        }
    }

    #[test]
    fn square_function_examples() {
        let f = tensor4();
        let ctx = *f.context();
        let d = Operator::diagonal(ctx, &[3.0, 3.0, 1.0, 1.0]).unwrap();
        let x = MartingaleSequence::from_final(f, &d).unwrap();
        let dx = x.differences();
        let sc = dx.square_function(Side::Column, 2).unwrap();
        let sr = dx.square_function(Side::Row, 2).unwrap();
        assert!((sc.clone() - sr).max_abs() < 1e-12);
        assert!((dx.sequence_norm(Side::Column, NormKind::Lp(1.0)).unwrap() - 2.0).abs() < 1e-12);
        assert!((dx.sequence_norm(Side::Column, NormKind::WeakL1).unwrap() - 1.5).abs() < 1e-12);
        assert!(dx.square_function(Side::Column, 0).is_err());
        assert!(dx.square_function(Side::Column, 3).is_err());
        assert!(dx.sequence_norm(Side::Row, NormKind::Lp(0.5)).is_err());
        let single = dx.square_function(Side::Column, 1).unwrap();
        assert!((single - spectral::modulus(&dx.diffs()[0]).unwrap()).max_abs() < 1e-12);
    }

    #[test]
    fn hardy_examples() {
        let ctx = TracialContext::new(8).unwrap();
        let f = Arc::new(Filtration::tensor(ctx, 3).unwrap());
        let x = random_positive_martingale(f, 11, 1.0).unwrap();
        let h2 = hardy_norm(&x, 2.0, &[]).unwrap();
        assert_eq!(h2.kind, HardyValueKind::Norm);
        assert!((h2.value - x.last().norm2()).abs() < 1e-9);
        let h1 = hardy_norm(&x, 1.0, &[]).unwrap();
        assert_eq!(h1.kind, HardyValueKind::UpperBound);
        let dx = x.differences();
        let c = dx.sequence_norm(Side::Column, NormKind::Lp(1.0)).unwrap();
        let r = dx.sequence_norm(Side::Row, NormKind::Lp(1.0)).unwrap();
        assert!((h1.value - c.min(r)).abs() < 1e-12);

        let zero = DifferenceSequence::from_parts(dx.filtration().clone(), vec![ctx.zero(); 3]);
        let half = |d: &DifferenceSequence| {
            DifferenceSequence::from_parts(d.filtration().clone(), d.diffs().iter().map(|x| x.scale(0.5)).collect())
        };
        let cand = HardyCandidate { label: "half".into(), column: half(&dx), row: half(&dx) };
        let with = hardy_norm(&x, 1.0, &[cand]).unwrap();
        assert!(with.value <= h1.value + 1e-15);
        let bad = HardyCandidate { label: "bad".into(), column: zero.clone(), row: zero };
        assert!(hardy_norm(&x, 1.0, &[bad]).is_err());
    }

    #[test]
    fn supermartingale_examples() {
        let ctx = TracialContext::new(2).unwrap();
        let f = Filtration::new(ctx, vec![Subalgebra::scalars(ctx), Subalgebra::full(ctx)]).unwrap();
        assert!(!is_supermartingale(&f, &[ctx.zero(), ctx.identity()]).unwrap());
        assert!(is_supermartingale(&f, &[ctx.identity(), ctx.zero()]).unwrap());
        let x = random_positive_martingale(Arc::new(f.clone()), 3, 1.0).unwrap();
        assert!(is_supermartingale(&f, x.terms()).unwrap());
        let skew = Operator::from_real_rows(ctx, &[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(is_supermartingale(&f, &[skew.clone(), skew]).is_err());
    }

    #[test]
    fn generator_is_deterministic_and_validated() {
        let f = tensor4();
        let a = random_martingale(f.clone(), Ensemble::Spiky, 9, 2.0).unwrap();
        let b = random_martingale(f.clone(), Ensemble::Spiky, 9, 2.0).unwrap();
        assert_eq!(a.last(), b.last());
        assert!((a.norm(1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(random_positive_martingale(f, 1, 0.0).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let f = tensor4();
        let x = random_positive_martingale(f.clone(), 4, 1.0).unwrap();
        let s = serde_json::to_string(&x.to_json().unwrap()).unwrap();
        let back = MartingaleSequence::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        for (a, b) in back.terms().iter().zip(x.terms()) {
            assert!((a - b).max_abs() < 1e-12);
        }
        let ctx = *f.context();
        let not_adapted = vec![Operator::matrix_unit(ctx, 0, 0).unwrap(), ctx.identity()];
        assert!(MartingaleSequence::new(f.clone(), not_adapted).is_err());
        assert!(MartingaleSequence::new(f, x.terms().to_vec()).is_ok());
    }
}
