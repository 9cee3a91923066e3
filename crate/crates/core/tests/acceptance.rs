//! Criteria 1 to 12, one line each. Exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ncmart_core::cuculescu::{c0_objective, theoretical_constant_c0, theoretical_constant_c0_with};
use ncmart_core::harness::checks::{
    expectation_axioms, random_projection_family, splitting_sample, truncation_identities,
};
use ncmart_core::harness::{self, Baseline, ExperimentConfig, ExperimentReport, REGRESSION_SLACK};
use ncmart_core::random::{rng_from_seed, wishart};
use ncmart_core::truncation::truncation_weak_bound;
use ncmart_core::{Filtration, Operator, TracialContext};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let e = t.elapsed();
    o.detail = format!("{} [{:.2}s]", o.detail, e.as_secs_f64());
    if let Some(l) = limit {
        if e > l {
            o.pass = false;
            o.detail += &format!(" exceeds {}s", l.as_secs());
        }
    }
    o
}

/// Worst `lhs − bound` over rows whose name matches, plus the row count.
fn worst(rep: &ExperimentReport, pred: impl Fn(&str) -> bool) -> (usize, usize, f64) {
    let rows: Vec<_> = rep.rows.iter().filter(|r| pred(&r.check)).collect();
    let failed = rows.iter().filter(|r| !r.pass).count();
    let max_lhs = rows.iter().map(|r| r.lhs).fold(0.0, f64::max);
    (rows.len(), failed, max_lhs)
}

fn rows_pass(rep: &ExperimentReport, label: &str, pred: impl Fn(&str) -> bool) -> Outcome {
    let (n, failed, max_lhs) = worst(rep, pred);
    outcome(n > 0 && failed == 0, format!("{label}: {n} rows, {failed} failed, max lhs {max_lhs:.3e}"))
}

fn criterion_1() -> Outcome {
    let mut rng = rng_from_seed(101);
    let ctx = TracialContext::new(16).unwrap();
    let t = Filtration::tensor(ctx, 4).unwrap();
    let d = Filtration::dyadic_diagonal(ctx, 4).unwrap();
    let c = Filtration::conjugated_seeded(&t, 17).unwrap();
    let mut max: f64 = 0.0;
    for f in [&t, &d, &c] {
        for _ in 0..100 {
            max = max.max(expectation_axioms(f, &mut rng).unwrap());
        }
    }
    outcome(max <= 1e-9, format!("max residual {max:.3e} over 300 probes (bound 1e-9)"))
}

fn criterion_5() -> Outcome {
    let mut rng = rng_from_seed(505);
    let mut max_ratio: f64 = 0.0;
    for trial in 0..200 {
        let n = [4, 8, 16, 32][trial % 4];
        let ctx = TracialContext::new(n).unwrap();
        let k = 1 + trial % 4;
        let fams: Vec<_> = (0..k)
            .map(|_| {
                let cells = rng.random_range(1..=n.min(8));
                random_projection_family(ctx, &mut rng, cells).unwrap()
            })
            .collect();
        let xs: Vec<_> = (0..k).map(|_| Operator::new(ctx, wishart(&mut rng, n)).unwrap()).collect();
        let r = truncation_weak_bound(&xs, &fams).unwrap();
        max_ratio = max_ratio.max(r.ratio);
    }
    outcome(max_ratio <= 1.0 + 1e-9, format!("max weak / (5√2 Σ‖x‖_1) = {max_ratio:.6}"))
}

fn criterion_6() -> Outcome {
    let mut rng = rng_from_seed(606);
    let mut split_fail = 0;
    for i in 0..1000 {
        let ctx = TracialContext::new([2, 4, 8, 16][i % 4]).unwrap();
        let (l, r) = splitting_sample(ctx, &mut rng).unwrap();
        split_fail += usize::from(l > r + 1e-12);
    }
    let mut id_fail = Vec::new();
    for i in 0..50 {
        let n = [4, 8, 16][i % 3];
        let ctx = TracialContext::new(n).unwrap();
        let fam = random_projection_family(ctx, &mut rng, 1 + i % n.min(6)).unwrap();
        for p in truncation_identities(&fam, &mut rng, 1e-9).unwrap() {
            if p.lhs > p.rhs {
                id_fail.push(p.name);
            }
        }
    }
    id_fail.dedup();
    outcome(
        split_fail == 0 && id_fail.is_empty(),
        format!("splitting failures {split_fail}/1000, identity failures {id_fail:?}"),
    )
}

fn criterion_9() -> Outcome {
    let fine = theoretical_constant_c0();
    let coarse = theoretical_constant_c0_with(2e-3);
    let witness = c0_objective(0.5, 0.5);
    let drift = (fine.c0 - coarse.c0).abs();
    outcome(
        fine.c0 <= 900.0 && witness <= 900.0 && drift <= 1e-6,
        format!("C0 = {:.10} at ({:.6}, {:.6}), witness {witness}, drift {drift:.2e}", fine.c0, fine.alpha, fine.beta),
    )
}

fn criterion_10(rep: &ExperimentReport) -> Outcome {
    let baseline = Baseline::embedded();
    let cfg = ExperimentConfig::default();
    let k_hat = rep.summary.empirical["k_hat"];
    let k_theory = theoretical_constant_c0().k_theory;
    let Some(b) = baseline.k_hat.filter(|_| baseline.matches(&cfg)) else {
        return outcome(false, "no calibration baseline for the default configuration");
    };
    let limit = b * (1.0 + REGRESSION_SLACK);
    outcome(
        k_hat.is_finite() && k_hat <= k_theory && k_hat <= limit,
        format!("K̂ = {k_hat:.6} ≤ K = {k_theory:.1}, baseline limit {limit:.6}"),
    )
}

fn criterion_11() -> Outcome {
    let cfg = ExperimentConfig::default();
    let rep = harness::bg_constant_sweep(&cfg).unwrap();
    let baseline = Baseline::embedded();
    let id = rep.max_ratio("hardy_l2_identity").unwrap_or(f64::INFINITY);
    let id_ok = rep.rows.iter().filter(|r| r.check == "hardy_l2_identity").all(|r| r.pass);
    let mut ok = id_ok && baseline.matches(&cfg);
    let mut parts = vec![format!("|α̂_2 − 1| ∨ |β̂_2 − 1| ≤ {:.2e}", id * 1e-8)];
    for p in ["1.05", "1.1", "1.2", "1.5"] {
        let v = rep.summary.empirical[&format!("alpha_hat_scaled_max[p={p}]")];
        let limit = baseline.alpha_scaled.get(p).map(|b| b * (1.0 + REGRESSION_SLACK));
        ok &= limit.is_some_and(|l| v <= l);
        parts.push(format!("p={p}: {v:.4} ≤ {:.4}", limit.unwrap_or(f64::NAN)));
    }
    outcome(ok, parts.join(", "))
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_ncmart"))
            .args(["verify", "--out"])
            .arg(&out)
            .stderr(std::process::Stdio::null())
            .status()
            .unwrap();
        (status.code(), std::fs::read(out.join("report.csv")).unwrap_or_default())
    };
    let (c1, a) = run("a");
    let (c2, b) = run("b");
    outcome(
        c1 == Some(0) && c2 == Some(0) && !a.is_empty() && a == b,
        format!("exit codes {c1:?}/{c2:?}, {} bytes, identical: {}", a.len(), a == b),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    results.push((1, timed(Some(Duration::from_secs(5)), criterion_1)));

    let t = Instant::now();
    let suite = harness::run_verification_suite(&ExperimentConfig::default()).unwrap();
    let suite_time = t.elapsed();
    let mut c2 = rows_pass(&suite, "martingale difference and reconstruction ≤ 1e-10", |c| {
        c == "martingale_difference" || c == "reconstruction"
    });
    c2.detail = format!("{} [{:.2}s for the 200-trial suite]", c2.detail, suite_time.as_secs_f64());
    c2.pass &= suite_time < Duration::from_secs(120);
    results.push((2, c2));
    results.push((3, rows_pass(&suite, "column + row square functions ≤ 2‖x‖_2 + 1e-9", |c| c == "l2_bound")));
    results.push((4, rows_pass(&suite, "five projection invariants per scale", |c| c.starts_with("cuculescu_"))));
    results.push((5, timed(Some(Duration::from_secs(120)), criterion_5)));
    results.push((6, timed(None, criterion_6)));
    results.push((
        7,
        rows_pass(&suite, "compression energy ≤ 2^(n0+1) + 1e-8 and supermartingale", |c| {
            c == "replay_compression_energy" || c == "replay_supermartingale"
        }),
    ));
    results.push((8, rows_pass(&suite, "square expansion residual ≤ 1e-9", |c| c == "square_expansion")));
    results.push((9, timed(Some(Duration::from_secs(10)), criterion_9)));
    results.push((10, criterion_10(&suite)));
    results.push((11, timed(None, criterion_11)));
    results.push((12, timed(None, criterion_12)));

    let mut all = true;
    for (k, o) in &results {
        println!("criterion {k:>2}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        all &= o.pass;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
