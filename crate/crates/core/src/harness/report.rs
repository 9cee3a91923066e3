use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

pub const CSV_HEADER: &str = "trial,check,lhs,rhs,ratio,pass";

/// One inequality evaluated on one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub trial: usize,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

pub(crate) fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs != 0.0 {
        lhs / rhs
    } else if lhs <= 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

impl Row {
    /// `lhs ≤ rhs + slack`.
    pub fn le(trial: usize, check: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self { trial, check: check.into(), lhs, rhs, ratio: ratio(lhs, rhs), pass: lhs <= rhs + slack }
    }

    /// A recorded statistic; passes whenever it is finite.
    pub fn stat(trial: usize, check: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let r = ratio(lhs, rhs);
        Self { trial, check: check.into(), lhs, rhs, ratio: r, pass: r.is_finite() }
    }

    fn csv_line(&self, out: &mut String) {
        let _ = write!(out, "{},{}", self.trial, self.check);
        for v in [self.lhs, self.rhs, self.ratio] {
            out.push(',');
            push_float(out, v);
        }
        let _ = writeln!(out, ",{}", self.pass);
    }
}

// Shortest round-trip form; exponent notation away from unit scale.
fn push_float(out: &mut String, v: f64) {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        let _ = write!(out, "{v}");
    } else {
        let _ = write!(out, "{v:e}");
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub count: usize,
    pub passed: usize,
    pub max_ratio: f64,
    pub max_lhs: f64,
}

/// A frozen regression threshold compared against an ensemble statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub command: String,
    pub trials: usize,
    pub rows: usize,
    pub all_pass: bool,
    pub checks: BTreeMap<String, CheckSummary>,
    pub empirical: BTreeMap<String, f64>,
    pub regression: Vec<RegressionCheck>,
    pub wall_time_seconds: f64,
}

impl Summary {
    /// Folds rows into per-check counts and maxima; independent of row order.
    pub fn checks_from_rows(rows: &[Row]) -> BTreeMap<String, CheckSummary> {
        let mut out: BTreeMap<String, CheckSummary> = BTreeMap::new();
        for r in rows {
            let e = out.entry(r.check.clone()).or_insert(CheckSummary {
                count: 0,
                passed: 0,
                max_ratio: f64::NEG_INFINITY,
                max_lhs: f64::NEG_INFINITY,
            });
            e.count += 1;
            e.passed += usize::from(r.pass);
            e.max_ratio = e.max_ratio.max(r.ratio);
            e.max_lhs = e.max_lhs.max(r.lhs);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl ExperimentReport {
    pub fn new(
        command: &str,
        trials: usize,
        rows: Vec<Row>,
        empirical: BTreeMap<String, f64>,
        regression: Vec<RegressionCheck>,
        wall_time_seconds: f64,
    ) -> Self {
        let checks = Summary::checks_from_rows(&rows);
        let all_pass = rows.iter().all(|r| r.pass) && regression.iter().all(|r| r.pass);
        let summary = Summary {
            command: command.into(),
            trials,
            rows: rows.len(),
            all_pass,
            checks,
            empirical,
            regression,
            wall_time_seconds,
        };
        Self { rows, summary }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.all_pass
    }

    /// Maximum ratio of a check across trials.
    pub fn max_ratio(&self, check: &str) -> Option<f64> {
        self.summary.checks.get(check).map(|c| c.max_ratio)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            r.csv_line(&mut out);
        }
        out
    }

    /// Rebuilds a report from `report.csv`; the per-check summary is
    /// recomputed from the rows.
    pub fn from_csv(command: &str, text: &str) -> Result<Self> {
        let rows = parse_csv(text)?;
        let trials = rows.iter().map(|r| r.trial + 1).max().unwrap_or(0);
        Ok(Self::new(command, trials, rows, BTreeMap::new(), vec![], 0.0))
    }

    /// Writes `report.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.to_csv())?;
        let json = serde_json::to_string_pretty(&self.summary).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(dir.join("summary.json"), json + "\n")?;
        Ok(())
    }
}

/// Parses a `report.csv` produced by [`ExperimentReport::to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<Row>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config("report.csv has an unexpected header".into()));
    }
    let bad = |l: &str| Error::Config(format!("malformed report row: {l}"));
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(bad(l));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(l));
            Ok(Row {
                trial: f[0].parse().map_err(|_| bad(l))?,
                check: f[1].to_string(),
                lhs: num(f[2])?,
                rhs: num(f[3])?,
                ratio: num(f[4])?,
                pass: f[5].parse().map_err(|_| bad(l))?,
            })
        })
        .collect()
}
