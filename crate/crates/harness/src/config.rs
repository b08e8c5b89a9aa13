//! JSON configuration for experiments and mechanism runs.

use std::path::{Path, PathBuf};

use alphasr::lp::MultiItemInstance;
use alphasr::mech::Environment;
use alphasr::{Discrete64, Dist64, DistSpec, SampleParams};
use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Accuracy, discard and failure parameters; `m` defaults to the theorem-grade count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub gamma: f64,
    pub xi: f64,
    pub delta: f64,
    #[serde(default)]
    pub m: Option<usize>,
}

impl SampleSpec {
    pub fn new(gamma: f64, xi: f64, delta: f64) -> Self {
        Self { gamma, xi, delta, m: None }
    }

    pub fn params(&self) -> Result<SampleParams> {
        Ok(match self.m {
            Some(m) => SampleParams::new(m, self.gamma, self.xi, self.delta)?,
            None => SampleParams::theorem_grade(self.gamma, self.xi, self.delta)?,
        })
    }
}

/// Bidders, their priors and constraints. Single-parameter mechanisms read
/// `priors`; multi-item mechanisms read `items` as `items[bidder][item]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceSpec {
    pub priors: Vec<DistSpec>,
    /// Defaults to a single item among all bidders.
    pub environment: Option<Environment>,
    pub budgets: Option<Vec<f64>>,
    /// Per-bidder budget distributions; take precedence over `budgets`.
    pub budget_priors: Option<Vec<DistSpec>>,
    pub items: Option<Vec<Vec<DistSpec>>>,
    /// Per-bidder item limits for multi-item instances; default one each.
    pub limits: Option<Vec<usize>>,
}

impl InstanceSpec {
    pub fn single_item(priors: Vec<DistSpec>) -> Self {
        Self {
            priors,
            ..Self::default()
        }
    }

    pub fn bidders(&self) -> usize {
        self.priors.len()
    }

    pub fn dists(&self) -> Result<Vec<Dist64>> {
        ensure!(!self.priors.is_empty(), "instance needs at least one prior");
        self.priors.iter().map(|s| Ok(s.build::<f64>()?)).collect()
    }

    pub fn environment(&self) -> Result<Environment> {
        let env = match &self.environment {
            Some(e) => e.clone().validated()?,
            None => Environment::single_item(self.bidders()),
        };
        ensure!(
            env.bidders == self.bidders(),
            "environment has {} bidders but {} priors are given",
            env.bidders,
            self.bidders()
        );
        Ok(env)
    }

    pub fn fixed_budgets(&self) -> Result<Vec<f64>> {
        let b = self.budgets.clone().context("instance needs budgets")?;
        ensure!(b.len() == self.bidders(), "need one budget per bidder");
        ensure!(b.iter().all(|&x| x > 0.0), "budgets must be positive");
        Ok(b)
    }

    /// Budget distributions, falling back to point masses at the fixed budgets.
    pub fn budget_dists(&self) -> Result<Vec<Discrete64>> {
        if let Some(specs) = &self.budget_priors {
            ensure!(specs.len() == self.bidders(), "need one budget prior per bidder");
            return specs
                .iter()
                .map(|s| match s {
                    DistSpec::Discrete { support, pmf } => Ok(Discrete64::new(support.clone(), pmf.clone())?),
                    _ => bail!("budget priors must be discrete"),
                })
                .collect();
        }
        self.fixed_budgets()?
            .into_iter()
            .map(|b| Ok(Discrete64::point_mass(b)?))
            .collect()
    }

    /// The multi-item instance, with priors truncated at the budgets.
    pub fn multi_item(&self) -> Result<MultiItemInstance<f64>> {
        let items = self.items.as_ref().context("instance needs item priors")?;
        let priors = items
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| match s {
                        DistSpec::Discrete { support, pmf } => Ok(Discrete64::new(support.clone(), pmf.clone())?),
                        _ => bail!("item priors must be discrete"),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let bidders = priors.len();
        let budgets = self.budgets.clone().context("instance needs budgets")?;
        let limits = self.limits.clone().unwrap_or_else(|| vec![1; bidders]);
        Ok(MultiItemInstance::truncated(priors, budgets, limits)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub instance: Option<InstanceSpec>,
    pub sample: Option<SampleSpec>,
    /// Monte Carlo trials per estimate.
    pub trials: Option<u64>,
    /// Independent sample draws for sample-based experiments.
    pub resamples: Option<usize>,
    /// Strong-regularity parameter the targets assume.
    pub alpha: Option<f64>,
    pub master_seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            instance: None,
            sample: None,
            trials: None,
            resamples: None,
            alpha: None,
            master_seed: DEFAULT_SEED,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("invalid experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.trials.map_or(true, |t| t >= 1), "trials must be at least 1");
        ensure!(self.resamples.map_or(true, |r| r >= 1), "resamples must be at least 1");
        ensure!(self.alpha.map_or(true, |a| a > 0.0 && a < 1.0), "alpha must lie in (0, 1)");
        Ok(())
    }

    pub fn trials_or(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }

    pub fn resamples_or(&self, default: usize) -> usize {
        self.resamples.unwrap_or(default)
    }

    pub fn sample_or(&self, default: SampleSpec) -> SampleSpec {
        self.sample.unwrap_or(default)
    }
}

/// A JSON value given inline or as a path to a file holding it.
pub fn json_arg(arg: &str) -> Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment":"vcgl","trials":10,"master_seed":3,
                "instance":{"priors":[{"kind":"falpha","alpha":0.5}],
                            "environment":{"bidders":1,"kind":{"kind":"k_uniform","k":1}}},
                "sample":{"gamma":0.1,"xi":0.01,"delta":0.01}}"#,
        )
        .unwrap();
        assert_eq!(cfg.trials, Some(10));
        let inst = cfg.instance.unwrap();
        assert_eq!(inst.environment().unwrap(), Environment::k_uniform(1, 1));
        assert_eq!(cfg.sample.unwrap().params().unwrap().m, 725_085);
    }

    #[test]
    fn rejects_zero_trials_and_unknown_fields() {
        assert!(ExperimentConfig::from_json(r#"{"trials":0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"trails":5}"#).is_err());
        assert_eq!(ExperimentConfig::from_json("{}").unwrap().master_seed, DEFAULT_SEED);
    }

    #[test]
    fn budgets_fall_back_to_point_masses() {
        let mut inst = InstanceSpec::single_item(vec![DistSpec::Falpha { alpha: 0.5, scale: 1.0 }]);
        inst.budgets = Some(vec![2.0]);
        assert_eq!(inst.budget_dists().unwrap()[0].support(), &[2.0]);
    }
}
