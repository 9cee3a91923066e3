use serde::{Deserialize, Serialize};

use super::constant::{c0_objective, k1_constant};
use super::{dyadic_families, DyadicFamilies};
use crate::martingale::{supermartingale_gap, MartingaleSequence};
use crate::spectral;
use crate::tracial::Operator;
use crate::truncation::{triangular_truncate, ProjectionFamily};
use crate::{Error, Result};

/// Splitting parameters `α, β ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ReplayParams {
    fn default() -> Self {
        Self { alpha: 0.5, beta: 0.5 }
    }
}

impl ReplayParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// `{name, lhs, rhs, margin = rhs − lhs, pass}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayRecord {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl ReplayRecord {
    fn new(name: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self { name: name.into(), lhs, rhs, margin: rhs - lhs, pass: lhs <= rhs + slack }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub n0: u32,
    pub upto: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `‖x‖_1` of the input; the replay runs on `x / ‖x‖_1`.
    pub normalization: f64,
    pub k1: f64,
    pub records: Vec<ReplayRecord>,
}

impl ReplayReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn record(&self, name: &str) -> Option<&ReplayRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}

/// Replays the estimate `τ(χ_{(2^{n0},∞)}(S_{C,N}(y))) ≤ f(α,β) 2^{−n0}` for a
/// positive martingale, normalising to `‖x‖_1 = 1` first.
pub fn proof_replay(x: &MartingaleSequence, n0: u32, upto: usize, params: ReplayParams) -> Result<ReplayReport> {
    params.validate()?;
    let norm1 = x.last().trace().re;
    if norm1.is_nan() || norm1 <= 0.0 {
        return Err(Error::InvalidArgument("replay needs a non-zero positive martingale".into()));
    }
    let xs = x.terms().iter().map(|t| t.scale(1.0 / norm1)).collect();
    let normalized = MartingaleSequence::new(x.filtration().clone(), xs)?;
    let families = dyadic_families(&normalized)?;
    let mut report = proof_replay_with(&normalized, &families, n0, upto, params)?;
    report.normalization = norm1;
    Ok(report)
}

/// As [`proof_replay`] on an already normalised martingale and its families.
pub fn proof_replay_with(
    x: &MartingaleSequence,
    families: &DyadicFamilies,
    n0: u32,
    upto: usize,
    params: ReplayParams,
) -> Result<ReplayReport> {
    params.validate()?;
    let ReplayParams { alpha, beta } = params;
    let ctx = *x.filtration().context();
    if (x.last().trace().re - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("replay expects ‖x‖_1 = 1".into()));
    }
    if n0 > families.k_max() {
        return Err(Error::InvalidArgument(format!("n0 = {n0} exceeds k_max = {}", families.k_max())));
    }
    if upto == 0 || upto > x.len() {
        return Err(Error::InvalidArgument(format!("N = {upto} outside 1..={}", x.len())));
    }
    let dx = x.differences();
    let dx = &dx.diffs()[..upto];
    let run = families.run(n0);
    let q = &run.q_levels;
    let lam = f64::from(2u32.pow(n0));
    let lam2 = lam * lam;

    // Column part of the decomposition and its square function.
    let mut s = ctx.zero();
    for (k, d) in dx.iter().enumerate() {
        let fam = families.level(k.max(1));
        s = s + triangular_truncate(fam, d)?.abs_squared();
    }
    let s = s.hermitian_part();
    let s_col = spectral::sqrt_psd(&s)?;

    // Truncated families {p_{i,n−1}}_{i≤n0}, with {p_{i,1}} at n = 1.
    let cut = |n: usize| -> ProjectionFamily { families.level(n.max(1)).truncated(n0 as usize + 1) };
    let mut gamma = ctx.zero();
    let mut g1 = ctx.zero();
    let mut g2 = ctx.zero();
    let mut g3 = ctx.zero();
    let mut g3_positive: f64 = 0.0;
    for (k, d) in dx.iter().enumerate() {
        let fam = cut(k);
        gamma = gamma + triangular_truncate(&fam, d)?.abs_squared();
        if k == 0 {
            g1 = g1 + triangular_truncate(&fam, d)?.abs_squared();
            continue;
        }
        let (qn, qp) = (&q[k], &q[k - 1]);
        let drop = qp - qn;
        g1 = g1 + triangular_truncate(&fam, &(d * qn))?.abs_squared().scale(2.0);
        g2 = g2 + triangular_truncate(&fam, &(qn * d * &drop))?.abs_squared().scale(4.0);
        let c = (&drop * d * &drop).hermitian_part();
        g3_positive = g3_positive.max(-spectral::min_eigenvalue(&c)?);
        g3 = g3 + triangular_truncate(&fam, &c)?.abs_squared().scale(4.0);
    }
    let (gamma, g1, g2, g3) = (gamma.hermitian_part(), g1.hermitian_part(), g2.hermitian_part(), g3.hermitian_part());

    // D = ‖q_1x_1q_1‖² + Σ ‖q_nx_nq_n − q_{n−1}x_{n−1}q_{n−1}‖².
    let comp: Vec<Operator> = x.terms()[..upto].iter().zip(q).map(|(t, qn)| (qn * t * qn).hermitian_part()).collect();
    let mut dsum = comp[0].norm2().powi(2);
    for w in comp.windows(2) {
        dsum += (&w[1] - &w[0]).norm2().powi(2);
    }

    let w = super::w_projection(families, n0)?;
    let k1 = k1_constant(alpha, beta);
    let ia = 1.0 / alpha;
    let ib = 1.0 / (1.0 - alpha);
    let dist = spectral::distribution;
    let tol = ctx.tolerances();
    let op_tol = tol.psd * (1.0 + gamma.norm_inf() + g1.norm_inf() + g2.norm_inf() + g3.norm_inf());
    let mut records = Vec::new();

    let tail = ib * 2.0 / lam;
    let a_lhs = dist(&s_col, lam)?;
    let a_rhs = ia * dist(&gamma, beta * lam2)? + tail;
    records.push(ReplayRecord::new("square_function_reduction", a_lhs, a_rhs, 1e-12));
    let wsw = (&w * &s * &w - &w * &gamma * &w).norm_inf();
    records.push(ReplayRecord::new("compressed_identity", wsw, tol.span_residual * (1.0 + s.norm_inf()), 0.0));

    let excess = spectral::max_eigenvalue(&(&gamma - (&g1 + &g2 + &g3)).hermitian_part())?;
    records.push(ReplayRecord::new("gamma_split", excess, op_tol, 0.0));
    records.push(ReplayRecord::new("gamma3_positive", g3_positive, op_tol, 0.0));

    let g1_tail = ia * dist(&g1, beta * beta * lam2)?;
    let g1_bound = 2.0 * ia / (beta * beta * lam2) * dsum;
    records.push(ReplayRecord::new("gamma1_tail", g1_tail, g1_bound, 1e-12));
    let g2_tail = ia * ib * dist(&g2, (1.0 - beta) * beta * beta * lam2)?;
    let g2_bound = 4.0 * ia * ib / ((1.0 - beta) * beta * beta) / lam;
    records.push(ReplayRecord::new("gamma2_tail", g2_tail, g2_bound, 1e-12));
    let g3_tail = ib * ib * dist(&g3, (1.0 - beta).powi(2) * beta * lam2)?;
    let g3_bound = 10.0 * std::f64::consts::SQRT_2 * ib * ib / ((1.0 - beta) * beta.sqrt()) / lam;
    records.push(ReplayRecord::new("gamma3_tail", g3_tail, g3_bound, 1e-12));

    let b_lhs = dist(&gamma, beta * lam2)?;
    let b_rhs = 2.0 * ia / (beta * beta * lam2) * dsum + k1 / lam;
    records.push(ReplayRecord::new("gamma_tail", b_lhs, b_rhs, 1e-12));
    records.push(ReplayRecord::new("compression_energy", dsum, 2.0 * lam, 1e-8));

    let wt = 1.0 - w.trace().re;
    records.push(ReplayRecord::new("w_tail", wt, 2.0 / lam, 1e-9));
    let gap = supermartingale_gap(x.filtration(), &comp)?;
    records.push(ReplayRecord::new("supermartingale", gap.violation, gap.tolerance, 0.0));
    records.push(ReplayRecord::new("weak_dyadic", a_lhs, c0_objective(alpha, beta) / lam, 1e-12));

    Ok(ReplayReport { n0, upto, alpha, beta, normalization: 1.0, k1, records })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::martingale::{random_martingale, Ensemble};
    use crate::tracial::{Filtration, Subalgebra, TracialContext};

    #[test]
    fn constant_martingale_at_level_zero() {
        let ctx = TracialContext::new(4).unwrap();
        let f = Arc::new(Filtration::tensor(ctx, 2).unwrap());
        let x = MartingaleSequence::from_final(f, &Operator::diagonal(ctx, &[1.0, 1.0, 1.0, 1.0]).unwrap()).unwrap();
        let r = proof_replay(&x, 0, 2, ReplayParams::default()).unwrap();
        let d = r.record("compression_energy").unwrap();
        assert!(d.lhs <= 1.0 + 1e-12 && d.rhs == 2.0);
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn single_level_gamma_is_first_summand() {
        let ctx = TracialContext::new(4).unwrap();
        let f = Arc::new(Filtration::new(ctx, vec![Subalgebra::full(ctx)]).unwrap());
        let x = random_martingale(f, Ensemble::Spiky, 3, 1.0).unwrap();
        let r = proof_replay(&x, 0, 1, ReplayParams::default()).unwrap();
        assert!(r.all_pass(), "{r:?}");
        assert_eq!(r.record("gamma2_tail").unwrap().lhs, 0.0);
        assert_eq!(r.record("gamma3_tail").unwrap().lhs, 0.0);
    }

    #[test]
    fn random_replays_pass() {
        let ctx = TracialContext::new(16).unwrap();
        let f = Arc::new(Filtration::tensor(ctx, 4).unwrap());
        for (seed, ens) in [(7, Ensemble::Wishart), (8, Ensemble::Spiky)] {
            let x = random_martingale(f.clone(), ens, seed, 3.0).unwrap();
            let norm =
                MartingaleSequence::new(f.clone(), x.terms().iter().map(|t| t.scale(1.0 / 3.0)).collect()).unwrap();
            let fam = dyadic_families(&norm).unwrap();
            for n0 in 0..=fam.k_max() {
                let r = proof_replay_with(&norm, &fam, n0, 4, ReplayParams::default()).unwrap();
                assert!(r.all_pass(), "n0 {n0}: {r:?}");
            }
            let r = proof_replay(&x, 0, 4, ReplayParams::default()).unwrap();
            assert!((r.normalization - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parameters_are_validated() {
        let ctx = TracialContext::new(2).unwrap();
        let f = Arc::new(Filtration::new(ctx, vec![Subalgebra::full(ctx)]).unwrap());
        let x = MartingaleSequence::from_final(f, &ctx.identity()).unwrap();
        assert!(proof_replay(&x, 0, 1, ReplayParams { alpha: 1.0, beta: 0.5 }).is_err());
        assert!(proof_replay(&x, 0, 2, ReplayParams::default()).is_err());
        assert!(proof_replay(&x, 5, 1, ReplayParams::default()).is_err());
    }
}
