//! Cuculescu's maximal projections for positive martingales, the dyadic
//! disjoint families built from them, and a numerical replay of the weak-type
//! estimate at a dyadic level.

mod constant;
mod families;
mod replay;

use rayon::prelude::*;
use serde::Serialize;

use crate::martingale::MartingaleSequence;
use crate::spectral::{self, Interval};
use crate::tracial::Operator;
use crate::{Error, Result};

pub use constant::{c0_objective, k1_constant, theoretical_constant_c0, theoretical_constant_c0_with, C0Result};
pub use families::{
    dyadic_families, dyadic_families_with_cutoff, scale_cutoff, w_projection, DyadicFamilies, DyadicReport,
};
pub use replay::{proof_replay, proof_replay_with, ReplayParams, ReplayRecord, ReplayReport};

/// One named inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Check {
    pub(crate) fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, rhs, pass: lhs <= rhs }
    }
}

/// `q_1 ≥ q_2 ≥ … ≥ q_T` at threshold `λ`, with `q_final = q_T`.
#[derive(Debug, Clone)]
pub struct CuculescuResult {
    pub lambda: f64,
    pub q_levels: Vec<Operator>,
    pub q_final: Operator,
}

fn require_positive(x: &MartingaleSequence) -> Result<()> {
    for t in x.terms() {
        if !t.is_positive() {
            return Err(Error::NotPositive { min_eigenvalue: spectral::min_eigenvalue(t)? });
        }
    }
    Ok(())
}

fn require_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("λ = {lambda} must be positive")))
    }
}

/// `q_n = q_{n−1} − χ_{(λ,∞)}(q_{n−1} x_n q_{n−1})`, starting from `q_0 = 1`.
pub fn cuculescu_projections(x: &MartingaleSequence, lambda: f64) -> Result<CuculescuResult> {
    require_positive(x)?;
    require_lambda(lambda)?;
    cuculescu_unchecked(x, lambda)
}

pub(crate) fn cuculescu_unchecked(x: &MartingaleSequence, lambda: f64) -> Result<CuculescuResult> {
    let ctx = *x.filtration().context();
    let mut q = ctx.identity();
    let mut q_levels = Vec::with_capacity(x.len());
    for xn in x.terms() {
        let c = (&q * xn * &q).hermitian_part();
        let above = spectral::spectral_projection(&c, &Interval::above(lambda))?;
        q = spectral::snap_projection(&(&q - above).hermitian_part())?;
        q_levels.push(q.clone());
    }
    Ok(CuculescuResult { lambda, q_final: q.clone(), q_levels })
}

/// Runs the construction at every `λ = 2^k`, `k = 0..=k_max`, in parallel.
pub(crate) fn dyadic_runs(x: &MartingaleSequence, k_max: u32) -> Result<Vec<CuculescuResult>> {
    (0..=k_max).into_par_iter().map(|k| cuculescu_unchecked(x, f64::from(2u32.pow(k)))).collect()
}

/// `q_n = χ_{(0,λ]}(q_{n−1} x_n q_{n−1})`, read literally. This drops the
/// kernel of the compression and is kept only to exhibit the resulting
/// failure of the trace bound.
pub fn cuculescu_projections_literal(x: &MartingaleSequence, lambda: f64) -> Result<CuculescuResult> {
    require_positive(x)?;
    require_lambda(lambda)?;
    let ctx = *x.filtration().context();
    let mut q = ctx.identity();
    let mut q_levels = Vec::with_capacity(x.len());
    for xn in x.terms() {
        let c = (&q * xn * &q).hermitian_part();
        q = spectral::spectral_projection(&c, &Interval::open_closed(0.0, lambda))?;
        q_levels.push(q.clone());
    }
    Ok(CuculescuResult { lambda, q_final: q.clone(), q_levels })
}

/// Residuals of the five structural properties of a Cuculescu run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuculescuReport {
    pub lambda: f64,
    /// `max_n ‖q_n q_{n−1} − q_n‖_∞`.
    pub decreasing: Check,
    /// `max_n ‖E_n(q_n) − q_n‖_∞`.
    pub adapted: Check,
    /// `max_n ‖[q_n, q_{n−1} x_n q_{n−1}]‖_∞`.
    pub commutes: Check,
    /// `max_n λ_max(q_n x_n q_n − λ q_n)`.
    pub compression: Check,
    /// `τ(1 − q)` against `‖x‖_1 / λ`.
    pub trace: Check,
}

impl CuculescuReport {
    pub fn checks(&self) -> [&Check; 5] {
        [&self.decreasing, &self.adapted, &self.commutes, &self.compression, &self.trace]
    }

    pub fn all_pass(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }
}

impl CuculescuResult {
    pub fn check_invariants(&self, x: &MartingaleSequence) -> Result<CuculescuReport> {
        let f = x.filtration();
        let ctx = *f.context();
        let tol = ctx.tolerances();
        let xnorm = x.terms().iter().map(Operator::norm_inf).fold(0.0, f64::max);
        let scale = 1.0 + xnorm;
        let mut dec: f64 = 0.0;
        let mut adapted: f64 = 0.0;
        let mut comm: f64 = 0.0;
        let mut comp = f64::NEG_INFINITY;
        let mut prev = ctx.identity();
        for (k, (q, xn)) in self.q_levels.iter().zip(x.terms()).enumerate() {
            dec = dec.max((q * &prev - q).norm_inf());
            adapted = adapted.max((f.expectation(k + 1, q)? - q).norm_inf());
            let c = &prev * xn * &prev;
            comm = comm.max(q.commutator(&c).norm_inf());
            let top = spectral::max_eigenvalue(&(q * xn * q - q.scale(self.lambda)).hermitian_part())?;
            comp = comp.max(top);
            prev = q.clone();
        }
        let norm1 = x.norm(1.0)?;
        let defect = 1.0 - self.q_final.trace().re;
        let proj = tol.projection * scale;
        let band = tol.psd.max(tol.cluster) * scale;
        Ok(CuculescuReport {
            lambda: self.lambda,
            decreasing: Check::le("cuculescu_decreasing", dec, proj),
            adapted: Check::le("cuculescu_adapted", adapted, proj),
            commutes: Check::le("cuculescu_commutes", comm, proj * scale),
            compression: Check::le("cuculescu_compression", comp, band),
            trace: Check::le("cuculescu_trace", defect, norm1 / self.lambda + 1e-9),
        })
    }
}
