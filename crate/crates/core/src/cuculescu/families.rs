use serde::Serialize;

use super::{dyadic_runs, require_positive, Check, CuculescuResult};
use crate::martingale::MartingaleSequence;
use crate::spectral;
use crate::tracial::{Operator, TracialContext};
use crate::truncation::ProjectionFamily;
use crate::{Error, Result};

/// Smallest `k ≥ 0` with `2^k ≥ max_n ‖x_n‖_∞`. Above this scale every
/// Cuculescu projection is the identity.
pub fn scale_cutoff(x: &MartingaleSequence) -> u32 {
    let top = x.terms().iter().map(Operator::norm_inf).fold(0.0, f64::max);
    let mut k = 0;
    while f64::from(2u32.pow(k)) < top && k < 62 {
        k += 1;
    }
    k
}

/// Disjoint families carved from Cuculescu projections at the dyadic
/// thresholds `2^0, …, 2^{k_max}`.
///
/// Cell `i ≤ k_max` of level `n` is `W_{i,n} − W_{i−1,n}` where
/// `W_{i,n} = ⋀_{k=i}^{k_max} q_n^{(2^k)}` and `W_{−1,n} = 0`; cell `k_max + 1`
/// is the remainder `1 − W_{k_max,n}`, so every family sums to the identity.
/// The global family is built the same way from the final projections.
#[derive(Debug, Clone)]
pub struct DyadicFamilies {
    k_max: u32,
    runs: Vec<CuculescuResult>,
    meets: Vec<Vec<Operator>>,
    global_meets: Vec<Operator>,
    levels: Vec<ProjectionFamily>,
    global: ProjectionFamily,
}

fn cells(ctx: TracialContext, meets: &[Operator]) -> Result<ProjectionFamily> {
    let mut ps = Vec::with_capacity(meets.len() + 1);
    let mut prev = ctx.zero();
    for w in meets {
        ps.push(spectral::snap_projection(&(w - &prev).hermitian_part())?);
        prev = w.clone();
    }
    ps.push(spectral::snap_projection(&(ctx.identity() - prev).hermitian_part())?);
    Ok(ProjectionFamily::from_parts(ctx, ps))
}

/// `[⋀_{k=i}^{k_max} q^{(2^k)}]_{i=0..=k_max}`, accumulated from the top.
fn tail_meets(qs: &[&Operator]) -> Result<Vec<Operator>> {
    let mut out = vec![qs[qs.len() - 1].clone(); qs.len()];
    for i in (0..qs.len() - 1).rev() {
        out[i] = spectral::projection_meet(&[qs[i].clone(), out[i + 1].clone()])?;
    }
    Ok(out)
}

pub fn dyadic_families(x: &MartingaleSequence) -> Result<DyadicFamilies> {
    dyadic_families_with_cutoff(x, scale_cutoff(x))
}

/// As [`dyadic_families`] with an explicit `k_max`, which may exceed the
/// stabilisation scale; the extra cells are then zero.
pub fn dyadic_families_with_cutoff(x: &MartingaleSequence, k_max: u32) -> Result<DyadicFamilies> {
    require_positive(x)?;
    if k_max > 60 {
        return Err(Error::InvalidArgument(format!("k_max = {k_max} is too large")));
    }
    let ctx = *x.filtration().context();
    let runs = dyadic_runs(x, k_max)?;
    let mut meets = Vec::with_capacity(x.len());
    let mut levels = Vec::with_capacity(x.len());
    for n in 0..x.len() {
        let qs: Vec<&Operator> = runs.iter().map(|r| &r.q_levels[n]).collect();
        let w = tail_meets(&qs)?;
        levels.push(cells(ctx, &w)?);
        meets.push(w);
    }
    let qs: Vec<&Operator> = runs.iter().map(|r| &r.q_final).collect();
    let global_meets = tail_meets(&qs)?;
    let global = cells(ctx, &global_meets)?;
    Ok(DyadicFamilies { k_max, runs, meets, global_meets, levels, global })
}

/// `w_{n0} = Σ_{i≤n0} p_i`.
pub fn w_projection(families: &DyadicFamilies, n0: u32) -> Result<Operator> {
    if n0 > families.k_max {
        return Err(Error::InvalidArgument(format!("n0 = {n0} exceeds k_max = {}", families.k_max)));
    }
    let ctx = *families.global.context();
    Ok(families.global.projections()[..=n0 as usize].iter().fold(ctx.zero(), |acc, p| acc + p))
}

impl DyadicFamilies {
    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// Cuculescu run at `λ = 2^k`.
    pub fn run(&self, k: u32) -> &CuculescuResult {
        &self.runs[k as usize]
    }

    pub fn runs(&self) -> &[CuculescuResult] {
        &self.runs
    }

    /// `{p_{i,n}}_{i=0..=k_max+1}`, one-based in `n`.
    pub fn level(&self, n: usize) -> &ProjectionFamily {
        &self.levels[n - 1]
    }

    pub fn levels(&self) -> &[ProjectionFamily] {
        &self.levels
    }

    pub fn global(&self) -> &ProjectionFamily {
        &self.global
    }

    /// `⋀_{k=i}^{k_max} q_n^{(2^k)}`, one-based in `n`.
    pub fn level_meet(&self, i: u32, n: usize) -> &Operator {
        &self.meets[n - 1][i as usize]
    }

    /// `⋀_{k=i}^{k_max} q^{(2^k)}`.
    pub fn global_meet(&self, i: u32) -> &Operator {
        &self.global_meets[i as usize]
    }

    /// Orthogonality, completeness, adaptedness, domination by the Cuculescu
    /// projections, the `w` cross-check and its trace bound.
    pub fn check_invariants(&self, x: &MartingaleSequence) -> Result<DyadicReport> {
        let f = x.filtration();
        let ctx = *f.context();
        let tol = ctx.tolerances().projection * (1.0 + x.terms().iter().map(Operator::norm_inf).fold(0.0, f64::max));
        let mut orth: f64 = 0.0;
        let mut complete: f64 = 0.0;
        let mut adapted: f64 = 0.0;
        let mut dominated: f64 = 0.0;
        let all = self.levels.iter().map(Some).chain(std::iter::once(None));
        for (k, fam) in all.enumerate() {
            let fam = fam.unwrap_or(&self.global);
            let ps = fam.projections();
            for (i, p) in ps.iter().enumerate() {
                for q in &ps[i + 1..] {
                    orth = orth.max((p * q).norm_inf());
                }
            }
            let sum = ps.iter().fold(ctx.zero(), |acc, p| acc + p);
            complete = complete.max((sum - ctx.identity()).norm_inf());
            if k < self.levels.len() {
                for p in ps {
                    adapted = adapted.max((f.expectation(k + 1, p)? - p).norm_inf());
                }
            }
        }
        for n in 1..=self.levels.len() {
            let ps = self.level(n).projections();
            let mut acc = ctx.zero();
            for n0 in 0..=self.k_max {
                acc = acc + &ps[n0 as usize];
                let q = &self.run(n0).q_levels[n - 1];
                dominated = dominated.max((q * &acc - &acc).norm_inf());
            }
        }
        let mut w_meet: f64 = 0.0;
        let mut w_tail = Vec::with_capacity(self.k_max as usize + 1);
        let norm1 = x.norm(1.0)?;
        for n0 in 0..=self.k_max {
            let w = w_projection(self, n0)?;
            w_meet = w_meet.max((&w - self.global_meet(n0)).norm_inf());
            let bound = 2.0 * norm1 / f64::from(2u32.pow(n0));
            w_tail.push(Check::le(format!("w_tail_n0_{n0}"), 1.0 - w.trace().re, bound + 1e-9));
        }
        Ok(DyadicReport {
            k_max: self.k_max,
            orthogonal: Check::le("families_orthogonal", orth, tol),
            complete: Check::le("families_complete", complete, tol),
            adapted: Check::le("families_adapted", adapted, tol),
            dominated: Check::le("families_dominated", dominated, tol),
            w_meet_form: Check::le("w_meet_form", w_meet, tol),
            w_tail,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicReport {
    pub k_max: u32,
    pub orthogonal: Check,
    pub complete: Check,
    pub adapted: Check,
    pub dominated: Check,
    pub w_meet_form: Check,
    pub w_tail: Vec<Check>,
}

impl DyadicReport {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        [&self.orthogonal, &self.complete, &self.adapted, &self.dominated, &self.w_meet_form]
            .into_iter()
            .chain(self.w_tail.iter())
    }

    pub fn all_pass(&self) -> bool {
        self.checks().all(|c| c.pass)
    }
}
