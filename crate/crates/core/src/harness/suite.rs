use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use super::calibration::{regression, Baseline};
use super::checks;
use super::config::{ExperimentConfig, TrialFactory, TrialSetup};
use super::report::{ExperimentReport, RegressionCheck, Row};
use crate::cuculescu::{
    c0_objective, k1_constant, proof_replay_with, theoretical_constant_c0, theoretical_constant_c0_with, Check,
    ReplayParams,
};
use crate::decomposition::{decompose, Decomposition, DecompositionJson, DecompositionReport};
use crate::martingale::{hardy_norm, random_martingale, MartingaleJson, MartingaleSequence};
use crate::random;
use crate::spectral;
use crate::truncation::{truncation_weak_bound, TRUNCATION_WEAK_CONSTANT};
use crate::{Error, Result};

/// Whether trials run on the rayon pool or in order on the calling thread.
/// Both produce identical reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Serial,
}

/// Tolerance on the identity and residual checks of the suite.
const IDENTITY_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-10;

fn run_trials<F>(cfg: &ExperimentConfig, exec: Execution, job: F) -> Result<Vec<Row>>
where
    F: Fn(&TrialSetup) -> Result<Vec<Row>> + Sync,
{
    let factory = TrialFactory::new(cfg)?;
    let one = |t: usize| factory.setup(cfg.seed, t).and_then(|s| job(&s));
    let per_trial: Vec<Vec<Row>> = match exec {
        Execution::Parallel => (0..cfg.trials).into_par_iter().map(one).collect::<Result<_>>()?,
        Execution::Serial => (0..cfg.trials).map(one).collect::<Result<_>>()?,
    };
    Ok(per_trial.into_iter().flatten().collect())
}

fn trial_martingale(s: &TrialSetup) -> Result<MartingaleSequence> {
    random_martingale(s.filtration.clone(), s.ensemble, s.seed, 1.0)
}

fn push_check(rows: &mut Vec<Row>, trial: usize, c: &Check) {
    let mut r = Row::le(trial, c.name.clone(), c.lhs, c.rhs, 0.0);
    r.pass = c.pass;
    rows.push(r);
}

/// Rows for the four conclusions and the two square expansions.
pub fn decomposition_rows(trial: usize, r: &DecompositionReport, k_theory: f64) -> Vec<Row> {
    let mut weak = Row::le(trial, "weak_constant", r.weak_value, r.l1_norm, 0.0);
    weak.pass = weak.ratio <= k_theory;
    vec![
        Row::le(trial, "martingale_difference", r.martingale_difference, RESIDUAL_TOL, 0.0),
        Row::le(trial, "reconstruction", r.reconstruction, RESIDUAL_TOL, 0.0),
        Row::le(trial, "l2_bound", r.l2_value, 2.0 * r.l2_norm, 1e-9),
        weak,
        Row::le(trial, "square_expansion", r.square_expansion, IDENTITY_TOL, 0.0),
        Row::le(trial, "row_square_expansion", r.row_square_expansion, IDENTITY_TOL, 0.0),
    ]
}

fn verify_trial(cfg: &ExperimentConfig, s: &TrialSetup, k_theory: f64) -> Result<Vec<Row>> {
    let t = s.trial;
    let ctx = *s.filtration.context();
    let x = trial_martingale(s)?;
    let mut rng = random::rng_from_seed(random::splitmix64(s.seed ^ 0xa5a5));
    let mut rows = Vec::new();

    let ax = checks::expectation_axioms(&s.filtration, &mut rng)?;
    rows.push(Row::le(t, "conditional_expectation", ax, cfg.tolerances.span_residual * 2.0, 0.0));
    for _ in 0..3 {
        let (l, r) = checks::splitting_sample(ctx, &mut rng)?;
        rows.push(Row::le(t, "splitting", l, r, 1e-12));
    }

    let d = decompose(&x)?;
    let fam = d.families().ok_or_else(|| Error::NumericalBreakdown("positive draw split into several parts".into()))?;

    let random_family = checks::random_projection_family(ctx, &mut rng, 1 + t % 8)?;
    for family in [fam.global(), &random_family] {
        for p in checks::truncation_identities(family, &mut rng, IDENTITY_TOL)? {
            rows.push(Row::le(t, p.name, p.lhs, p.rhs, 0.0));
        }
    }
    let w = truncation_weak_bound(x.terms(), fam.levels())?;
    rows.push(Row::le(t, "truncation_weak", w.weak_norm, w.bound, 1e-9 * w.bound));

    for run in fam.runs() {
        for c in run.check_invariants(&x)?.checks() {
            push_check(&mut rows, t, c);
        }
    }
    for c in fam.check_invariants(&x)?.checks() {
        push_check(&mut rows, t, c);
    }

    rows.extend(decomposition_rows(t, &d.verify()?, k_theory));

    let params = ReplayParams { alpha: cfg.alpha, beta: cfg.beta };
    for n0 in 0..=fam.k_max() {
        let rep = proof_replay_with(&x, fam, n0, x.len(), params)?;
        for r in rep.records {
            let mut row = Row::le(t, format!("replay_{}", r.name), r.lhs, r.rhs, 0.0);
            row.pass = r.pass;
            rows.push(row);
        }
    }
    Ok(rows)
}

fn finish(
    command: &str,
    cfg: &ExperimentConfig,
    rows: Vec<Row>,
    empirical: BTreeMap<String, f64>,
    regression: Vec<RegressionCheck>,
    start: Instant,
) -> ExperimentReport {
    ExperimentReport::new(command, cfg.trials, rows, empirical, regression, start.elapsed().as_secs_f64())
}

fn max_ratio(rows: &[Row], check: &str) -> f64 {
    rows.iter().filter(|r| r.check == check).map(|r| r.ratio).fold(0.0, f64::max)
}

/// Every hard inequality on `trials` seeded positive martingales, plus the
/// empirical weak-type constant checked against the theoretical one and the
/// calibration baseline.
pub fn run_verification_suite(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_verification_suite_with(cfg, Execution::Parallel, &Baseline::embedded())
}

pub fn run_verification_suite_with(
    cfg: &ExperimentConfig,
    exec: Execution,
    baseline: &Baseline,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let c0 = theoretical_constant_c0();
    let rows = run_trials(cfg, exec, |s| verify_trial(cfg, s, c0.k_theory))?;
    let k_hat = max_ratio(&rows, "weak_constant");
    let mut empirical = BTreeMap::new();
    empirical.insert("k_hat".into(), k_hat);
    empirical.insert("k_theory".into(), c0.k_theory);
    empirical.insert("c0".into(), c0.c0);
    empirical.insert("truncation_constant_hat".into(), max_ratio(&rows, "truncation_weak") * TRUNCATION_WEAK_CONSTANT);
    let mut reg = vec![RegressionCheck {
        name: "k_hat_vs_theory".into(),
        value: k_hat,
        threshold: c0.k_theory,
        pass: k_hat <= c0.k_theory,
    }];
    if cfg.trials > 0 && baseline.matches(cfg) {
        reg.extend(regression("k_hat_vs_baseline", k_hat, baseline.k_hat));
    }
    Ok(finish("verify", cfg, rows, empirical, reg, start))
}

fn p_label(p: f64) -> String {
    format!("{p}")
}

/// Hardy-norm to `L^p` ratios along `p_grid`. For `p < 2` the Hardy value is
/// an upper bound over the candidates `(x,0)`, `(0,x)` and the decomposition,
/// so `α̂_p` is an upper estimate and `β̂_p` a lower one; for `p ≥ 2` both are
/// exact.
pub fn bg_constant_sweep(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    bg_constant_sweep_with(cfg, Execution::Parallel, &Baseline::embedded())
}

pub fn bg_constant_sweep_with(
    cfg: &ExperimentConfig,
    exec: Execution,
    baseline: &Baseline,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    if cfg.p_grid.is_empty() {
        return Err(Error::Config("p_grid is empty".into()));
    }
    let rows = run_trials(cfg, exec, |s| {
        let x = trial_martingale(s)?;
        let cand = decompose(&x)?.hardy_candidate();
        let mut rows = Vec::new();
        for &p in &cfg.p_grid {
            let lp = x.norm(p)?;
            let h = hardy_norm(&x, p, std::slice::from_ref(&cand))?;
            let label = p_label(p);
            let a = Row::stat(s.trial, format!("alpha_hat[p={label}]"), h.value, lp);
            let b = Row::stat(s.trial, format!("beta_hat[p={label}]"), lp, h.value);
            if p < 2.0 {
                rows.push(Row::stat(s.trial, format!("alpha_hat_scaled[p={label}]"), a.ratio * (p - 1.0), 1.0));
            }
            if p == 2.0 {
                let dev = (a.ratio - 1.0).abs().max((b.ratio - 1.0).abs());
                rows.push(Row::le(s.trial, "hardy_l2_identity", dev, 1e-8, 0.0));
            }
            rows.push(a);
            rows.push(b);
        }
        Ok(rows)
    })?;
    let mut empirical = BTreeMap::new();
    let mut reg = Vec::new();
    let matches = cfg.trials > 0 && baseline.matches(cfg);
    for &p in cfg.p_grid.iter().filter(|&&p| p < 2.0) {
        let label = p_label(p);
        let m = max_ratio(&rows, &format!("alpha_hat_scaled[p={label}]"));
        empirical.insert(format!("alpha_hat_scaled_max[p={label}]"), m);
        if matches {
            reg.extend(regression(
                &format!("alpha_hat_scaled[p={label}]_vs_baseline"),
                m,
                baseline.alpha_scaled.get(&label).copied(),
            ));
        }
    }
    Ok(finish("bg-sweep", cfg, rows, empirical, reg, start))
}

/// Hardy-1 upper bound against `1 + ‖x_∞‖_{L log L}` per trial.
pub fn llogl_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    llogl_check_with(cfg, Execution::Parallel, &Baseline::embedded())
}

pub fn llogl_check_with(cfg: &ExperimentConfig, exec: Execution, baseline: &Baseline) -> Result<ExperimentReport> {
    let start = Instant::now();
    let rows = run_trials(cfg, exec, |s| {
        let x = trial_martingale(s)?;
        let cand = decompose(&x)?.hardy_candidate();
        let h = hardy_norm(&x, 1.0, &[cand])?;
        let l = spectral::llogl_norm(x.last())?;
        Ok(vec![Row::stat(s.trial, "llogl", h.value, 1.0 + l)])
    })?;
    let m = max_ratio(&rows, "llogl");
    let mut empirical = BTreeMap::new();
    empirical.insert("llogl_ratio_max".into(), m);
    let mut reg = Vec::new();
    if cfg.trials > 0 && baseline.matches(cfg) {
        reg.extend(regression("llogl_ratio_vs_baseline", m, baseline.llogl_ratio));
    }
    Ok(finish("llogl", cfg, rows, empirical, reg, start))
}

/// The minimised constant, its witness value at `(1/2, 1/2)` and its
/// stability across two grid resolutions.
pub fn c0_report(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let fine = theoretical_constant_c0();
    let coarse = theoretical_constant_c0_with(2e-3);
    let witness = c0_objective(0.5, 0.5);
    let rows = vec![
        Row::le(0, "c0_below_witness", fine.c0, witness, 0.0),
        Row::le(0, "c0_witness_bound", witness, 900.0, 0.0),
        Row::le(0, "c0_resolution_stability", (fine.c0 - coarse.c0).abs(), 1e-6, 0.0),
    ];
    let mut empirical = BTreeMap::new();
    empirical.insert("c0".into(), fine.c0);
    empirical.insert("alpha".into(), fine.alpha);
    empirical.insert("beta".into(), fine.beta);
    empirical.insert("k1_at_argmin".into(), k1_constant(fine.alpha, fine.beta));
    empirical.insert("k_theory".into(), fine.k_theory);
    empirical.insert("objective_at_half".into(), witness);
    let mut report = finish("c0", cfg, rows, empirical, vec![], start);
    report.summary.trials = 0;
    Ok(report)
}

/// Decomposes `input` (or trial 0 of the configured ensemble) and reports
/// the conclusions as rows of trial 0.
pub fn decompose_report(
    cfg: &ExperimentConfig,
    input: Option<&MartingaleJson>,
    with_matrices: bool,
) -> Result<(ExperimentReport, Decomposition, DecompositionJson)> {
    let start = Instant::now();
    let x = match input {
        Some(j) => MartingaleSequence::from_json(j)?,
        None => trial_martingale(&TrialFactory::new(cfg)?.setup(cfg.seed, 0)?)?,
    };
    let d = decompose(&x)?;
    let json = d.to_json(with_matrices)?;
    let c0 = theoretical_constant_c0();
    let rows = decomposition_rows(0, &json.report, c0.k_theory);
    let mut empirical = BTreeMap::new();
    empirical.insert("weak_ratio".into(), json.report.weak_ratio);
    empirical.insert("l2_ratio".into(), json.report.l2_ratio);
    let mut report = finish("decompose", cfg, rows, empirical, vec![], start);
    report.summary.trials = 1;
    Ok((report, d, json))
}

/// Runs the three calibrated experiments and freezes their statistics.
pub fn calibrate(cfg: &ExperimentConfig) -> Result<Baseline> {
    let none = Baseline::default();
    let v = run_verification_suite_with(cfg, Execution::Parallel, &none)?;
    let bg = bg_constant_sweep_with(cfg, Execution::Parallel, &none)?;
    let ll = llogl_check_with(cfg, Execution::Parallel, &none)?;
    let alpha_scaled = bg
        .summary
        .empirical
        .iter()
        .filter_map(|(k, v)| {
            k.strip_prefix("alpha_hat_scaled_max[p=").and_then(|r| r.strip_suffix(']')).map(|p| (p.to_string(), *v))
        })
        .collect();
    Ok(Baseline {
        fingerprint: Some(cfg.fingerprint()),
        k_hat: v.summary.empirical.get("k_hat").copied(),
        llogl_ratio: ll.summary.empirical.get("llogl_ratio_max").copied(),
        alpha_scaled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::FiltrationChoice;

    fn small() -> ExperimentConfig {
        ExperimentConfig { dimension: 8, depth: 3, trials: 6, ..Default::default() }
    }

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let cfg = small();
        let none = Baseline::default();
        let a = run_verification_suite_with(&cfg, Execution::Parallel, &none).unwrap();
        assert!(a.all_pass(), "{:?}", a.failures().next());
        let b = run_verification_suite_with(&cfg, Execution::Serial, &none).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.summary.empirical["k_hat"] > 0.0);
    }

    #[test]
    fn zero_trials_give_header_only() {
        let cfg = ExperimentConfig { trials: 0, ..small() };
        let r = run_verification_suite(&cfg).unwrap();
        assert!(r.rows.is_empty());
        assert!(r.all_pass());
    }

    #[test]
    fn sweep_identity_at_two() {
        let cfg = ExperimentConfig { trials: 4, filtration: FiltrationChoice::Conjugated, ..small() };
        let r = bg_constant_sweep(&cfg).unwrap();
        assert!(r.all_pass());
        assert!(r.max_ratio("hardy_l2_identity").unwrap() <= 1.0);
        let l = llogl_check(&cfg).unwrap();
        assert!(l.summary.empirical["llogl_ratio_max"].is_finite());
    }

    #[test]
    fn c0_rows_pass() {
        assert!(c0_report(&ExperimentConfig::default()).unwrap().all_pass());
    }
}
