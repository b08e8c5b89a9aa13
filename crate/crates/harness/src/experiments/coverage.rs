//! How often the sample coverage event holds, and the accuracy slacks on the
//! builds where it does.

use anyhow::Result;

use super::{falpha, instance_or, sample_model, target_alpha};
use crate::config::{ExperimentConfig, InstanceSpec, SampleSpec};
use crate::mc::{derive_seed, monte_carlo, Z95};
use crate::report::{Row, Verdict};

/// Slack rows pass above this floor, absorbing rounding in the curve comparisons.
const SLACK_TOL: f64 = 1e-9;

/// Wilson score interval for `hits` successes in `n` trials.
fn wilson(hits: f64, n: f64, z: f64) -> (f64, f64) {
    let p = hits / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let inst = instance_or(cfg, || InstanceSpec::single_item(vec![falpha(0.5)]));
    let truth = inst.dists()?.remove(0);
    let alpha = target_alpha(cfg, &inst.priors[..1])?;
    let sample = cfg.sample_or(SampleSpec::new(0.05, 0.05, 0.05));
    let params = sample.params()?;
    let gamma = sample.gamma;
    let builds = cfg.resamples_or(200) as u64;
    let est = monte_carlo(builds, derive_seed(cfg.master_seed, 0), 5, |rng| {
        let model = sample_model(&truth, &params, rng)?;
        if !model.coverage_event_holds(&truth, gamma) {
            return Ok(vec![0.0, f64::NAN, f64::NAN, f64::NAN, f64::NAN]);
        }
        let s = model.guarantee_slacks(&truth, gamma, Some(alpha))?;
        Ok(vec![
            1.0,
            s.reserve_revenue,
            s.curve_lower,
            s.curve_upper,
            s.reserve_quantile.unwrap_or(f64::NAN),
        ])
    })?;
    let covered = &est[0];
    let (lo, hi) = wilson(covered.mean * builds as f64, builds as f64, Z95);
    let target = 1.0 - sample.delta;
    let mut coverage = Row::value_at_least("coverage_rate", covered.mean, target).with_trials(builds);
    coverage.stderr = covered.stderr;
    coverage.ci_lo = lo;
    coverage.ci_hi = hi;
    coverage.verdict = if hi >= target { Verdict::Pass } else { Verdict::Fail };
    let mut rows = vec![Row::info("sample_count", params.m as f64), coverage];
    let names = ["reserve_revenue", "curve_lower", "curve_upper", "reserve_quantile"];
    for (name, e) in names.iter().zip(&est[1..]) {
        if e.count == 0 {
            rows.push(Row::info(format!("min_slack_{name}"), f64::NAN));
        } else {
            rows.push(Row::value_at_least(format!("min_slack_{name}"), e.min, -SLACK_TOL).with_trials(e.count));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_the_rate() {
        let (lo, hi) = wilson(190.0, 200.0, Z95);
        assert!(lo < 0.95 && 0.95 < hi);
        assert!((lo - 0.9104).abs() < 1e-3 && (hi - 0.9725).abs() < 1e-3);
        assert_eq!(wilson(200.0, 200.0, Z95).1, 1.0);
    }
}
