use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncmart_core::harness::{self, Baseline, Execution, ExperimentConfig, ExperimentReport};
use ncmart_core::martingale::MartingaleJson;
use ncmart_core::Error;

#[derive(Parser)]
#[command(name = "ncmart", version, about = "Seeded experiments on noncommutative martingales")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every inequality check on the configured ensemble.
    Verify(Common),
    /// Decompose one martingale (from --input, or trial 0 of the ensemble).
    Decompose(DecomposeArgs),
    /// Hardy to L^p ratios along the configured p grid.
    BgSweep(Common),
    /// Hardy-1 against L log L.
    Llogl(Common),
    /// Minimise the theoretical constant.
    C0(Common),
    /// Recompute the regression baseline and write calibration.json.
    Calibrate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.csv and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    /// Regression baseline to use instead of the built-in one.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Run trials on the calling thread.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    common: Common,
    /// Martingale JSON (`filtration` descriptor and `x_inf`).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Include dy, dz and the projection families in decomposition.json.
    #[arg(long)]
    matrices: bool,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NumericalBreakdown(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_path(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(n) = self.dim {
            cfg.dimension = n;
        }
        if let Some(d) = self.depth {
            cfg.depth = d;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn baseline(&self) -> Result<Baseline, Error> {
        match &self.baseline {
            Some(p) => Baseline::from_json(&std::fs::read_to_string(p)?),
            None => Ok(Baseline::embedded()),
        }
    }

    fn execution(&self) -> Execution {
        if self.serial {
            Execution::Serial
        } else {
            Execution::Parallel
        }
    }
}

fn emit(report: &ExperimentReport, out: Option<&Path>) -> Result<bool, Error> {
    if let Some(dir) = out {
        report.write(dir)?;
    }
    let s = &report.summary;
    let failed = report.failures().count();
    eprintln!("{}: {} rows, {} failed, {:.2}s", s.command, s.rows, failed, s.wall_time_seconds);
    for (k, v) in &s.empirical {
        eprintln!("  {k} = {v}");
    }
    for r in &s.regression {
        eprintln!("  regression {} {} <= {} {}", r.name, r.value, r.threshold, if r.pass { "ok" } else { "FAIL" });
    }
    for r in report.failures().take(20) {
        eprintln!("  FAIL trial {} {}: {} > {}", r.trial, r.check, r.lhs, r.rhs);
    }
    Ok(report.all_pass())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Verify(c) => {
            let cfg = c.config()?;
            let r = harness::run_verification_suite_with(&cfg, c.execution(), &c.baseline()?)?;
            Ok(emit(&r, cfg.output_dir.as_deref())?)
        }
        Command::BgSweep(c) => {
            let cfg = c.config()?;
            let r = harness::bg_constant_sweep_with(&cfg, c.execution(), &c.baseline()?)?;
            Ok(emit(&r, cfg.output_dir.as_deref())?)
        }
        Command::Llogl(c) => {
            let cfg = c.config()?;
            let r = harness::llogl_check_with(&cfg, c.execution(), &c.baseline()?)?;
            Ok(emit(&r, cfg.output_dir.as_deref())?)
        }
        Command::C0(c) => {
            let cfg = c.config()?;
            let r = harness::c0_report(&cfg)?;
            Ok(emit(&r, cfg.output_dir.as_deref())?)
        }
        Command::Decompose(a) => {
            let cfg = a.common.config()?;
            let input = match &a.input {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(Error::from)?;
                    Some(serde_json::from_str::<MartingaleJson>(&text).map_err(Error::from)?)
                }
                None => None,
            };
            let (r, _, json) = harness::decompose_report(&cfg, input.as_ref(), a.matrices)?;
            let pass = emit(&r, cfg.output_dir.as_deref())?;
            let text = serde_json::to_string_pretty(&json).map_err(|e| Error::Io(e.to_string()))? + "\n";
            match &cfg.output_dir {
                Some(dir) => std::fs::write(dir.join("decomposition.json"), text).map_err(Error::from)?,
                None => print!("{text}"),
            }
            Ok(pass)
        }
        Command::Calibrate(c) => {
            let cfg = c.config()?;
            let b = harness::calibrate(&cfg)?;
            let text = serde_json::to_string_pretty(&b).map_err(|e| Error::Io(e.to_string()))? + "\n";
            match &cfg.output_dir {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(Error::from)?;
                    std::fs::write(dir.join("calibration.json"), text).map_err(Error::from)?;
                }
                None => print!("{text}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("ncmart: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("ncmart: {m}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakdown_maps_to_its_own_exit_path() {
        assert!(matches!(Failure::from(Error::NumericalBreakdown("x".into())), Failure::Numerical(_)));
        assert!(matches!(Failure::from(Error::Config("x".into())), Failure::Usage(_)));
        assert!(matches!(Failure::from(Error::NotPositive { min_eigenvalue: -1.0 }), Failure::Usage(_)));
    }
}
