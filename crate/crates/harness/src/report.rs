//! Per-metric verdict rows and their CSV form.

use std::io::Write;
use std::time::Duration;

use anyhow::Result;
use serde::Serialize;

use crate::mc::Estimate;

/// Standard errors of slack granted to Monte Carlo comparisons.
pub const SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported for context; does not affect the exit status.
    Info,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub metric: String,
    pub value: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub target: f64,
    pub verdict: Verdict,
    pub trials: u64,
}

impl Row {
    fn exact(metric: impl Into<String>, value: f64, target: f64, verdict: Verdict) -> Self {
        Self {
            metric: metric.into(),
            value,
            stderr: 0.0,
            ci_lo: value,
            ci_hi: value,
            target,
            verdict,
            trials: 1,
        }
    }

    fn estimated(metric: impl Into<String>, e: &Estimate, target: f64, verdict: Verdict) -> Self {
        Self {
            metric: metric.into(),
            value: e.mean,
            stderr: e.stderr,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            target,
            verdict,
            trials: e.count,
        }
    }

    /// Passes when `mean + 4σ >= target`.
    pub fn at_least(metric: impl Into<String>, e: &Estimate, target: f64) -> Self {
        let ok = e.mean + SIGMAS * e.stderr >= target;
        Self::estimated(metric, e, target, Verdict::from_bool(ok))
    }

    /// Passes when `|mean - target| <= 4σ`.
    pub fn consistent_with(metric: impl Into<String>, e: &Estimate, target: f64) -> Self {
        let ok = (e.mean - target).abs() <= SIGMAS * e.stderr;
        Self::estimated(metric, e, target, Verdict::from_bool(ok))
    }

    pub fn estimate_info(metric: impl Into<String>, e: &Estimate) -> Self {
        Self::estimated(metric, e, f64::NAN, Verdict::Info)
    }

    /// Passes when `value >= target`.
    pub fn value_at_least(metric: impl Into<String>, value: f64, target: f64) -> Self {
        Self::exact(metric, value, target, Verdict::from_bool(value >= target))
    }

    /// Passes when `value <= target`.
    pub fn value_at_most(metric: impl Into<String>, value: f64, target: f64) -> Self {
        Self::exact(metric, value, target, Verdict::from_bool(value <= target))
    }

    /// Passes when `|value - target| <= tol`.
    pub fn close(metric: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self::exact(metric, value, target, Verdict::from_bool((value - target).abs() <= tol))
    }

    pub fn info(metric: impl Into<String>, value: f64) -> Self {
        Self::exact(metric, value, f64::NAN, Verdict::Info)
    }

    /// Overrides the trial count shown for an exact row derived from many runs.
    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment_id: String,
    pub seed: u64,
    pub rows: Vec<Row>,
    /// Wall-clock time; kept out of the CSV so reruns stay byte-identical.
    pub runtime: Duration,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    experiment_id: &'a str,
    metric: &'a str,
    value: f64,
    stderr: f64,
    ci_lo: f64,
    ci_hi: f64,
    target: f64,
    verdict: Verdict,
    seed: u64,
    trials: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn row(&self, metric: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(CsvRow {
                experiment_id: &self.experiment_id,
                metric: &r.metric,
                value: r.value,
                stderr: r.stderr,
                ci_lo: r.ci_lo,
                ci_hi: r.ci_hi,
                target: r.target,
                verdict: r.verdict,
                seed: self.seed,
                trials: r.trials,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::Stats;

    #[test]
    fn verdict_rules() {
        let e = Stats::from_values([0.9, 1.1]).estimate();
        assert_eq!(Row::at_least("m", &e, 1.2).verdict, Verdict::Pass);
        assert_eq!(Row::at_least("m", &e, 2.0).verdict, Verdict::Fail);
        assert_eq!(Row::close("c", 1.0, 1.0 + 1e-7, 1e-6).verdict, Verdict::Pass);
        assert_eq!(Row::value_at_most("c", 1.0, 0.5).verdict, Verdict::Fail);
    }

    #[test]
    fn csv_has_the_documented_columns() {
        let report = Report {
            experiment_id: "demo".into(),
            seed: 9,
            rows: vec![Row::info("x", 1.5)],
            runtime: Duration::ZERO,
        };
        let text = report.to_csv().unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "experiment_id,metric,value,stderr,ci_lo,ci_hi,target,verdict,seed,trials"
        );
        assert_eq!(lines.next().unwrap(), "demo,x,1.5,0.0,1.5,1.5,NaN,info,9,1");
        assert!(report.passed());
    }
}
