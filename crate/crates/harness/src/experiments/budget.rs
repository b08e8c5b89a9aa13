//! The coin flip between reserve-weighted allocation and budget-capped Myerson,
//! measured against the unconstrained efficient welfare.

use alphasr::mech::{myerson, two_mech_budget, Environment, TwoMechChoice, VirtualPrior};
use alphasr::{Discrete64, Dist64, DistSpec, EmpiricalModel};
use anyhow::{bail, Result};
use rand::Rng;

use super::{discrete_spec, draw_values, generated_priors, target_alpha};
use crate::config::{ExperimentConfig, InstanceSpec, SampleSpec};
use crate::mc::{derive_seed, monte_carlo, stream_rng, Estimate};
use crate::oracle::{exact_expectation, feasible_argmax};
use crate::report::Row;

const INSTANCES: u64 = 5;

/// Five three-bidder instances with generated priors on `{1..6}`, two slots, budgets `(2, 3, 4)`.
fn instances(cfg: &ExperimentConfig) -> Result<Vec<InstanceSpec>> {
    if let Some(inst) = &cfg.instance {
        return Ok(vec![inst.clone()]);
    }
    (0..INSTANCES)
        .map(|k| {
            let priors = generated_priors(derive_seed(cfg.master_seed, 100), k, 0.5, 6, 3)?;
            Ok(InstanceSpec {
                priors: priors.iter().map(discrete_spec).collect(),
                environment: Some(Environment::k_uniform(3, 2)),
                budgets: Some(vec![2.0, 3.0, 4.0]),
                ..InstanceSpec::default()
            })
        })
        .collect()
}

fn discrete_priors(inst: &InstanceSpec) -> Result<Vec<Discrete64>> {
    inst.priors
        .iter()
        .map(|p| match p {
            DistSpec::Discrete { support, pmf } => Ok(Discrete64::new(support.clone(), pmf.clone())?),
            _ => bail!("the coin-flip experiments need discrete priors"),
        })
        .collect()
}

/// `4/α + 2(α+1)/(α^{(2-α)/(1-α)} · shrink)`.
fn approximation_factor(alpha: f64, shrink: f64) -> f64 {
    4.0 / alpha + 2.0 * (alpha + 1.0) / (alpha.powf((2.0 - alpha) / (1.0 - alpha)) * shrink)
}

/// Exact efficient welfare `E[max feasible Σ v]`, an upper bound on any budget-feasible optimum.
fn efficient_welfare(env: &Environment, priors: &[Discrete64]) -> Result<f64> {
    exact_expectation(priors, |v| feasible_argmax(env, v).1)
}

fn coin_flip_welfare<P: VirtualPrior + Sync>(
    env: &Environment,
    priors: &[P],
    dists: &[Dist64],
    budgets: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    let est = monte_carlo(trials, seed, 1, |rng| {
        let choice = if rng.gen::<bool>() { TwoMechChoice::ReserveWeighted } else { TwoMechChoice::CappedMyerson };
        let values = draw_values(dists, rng);
        Ok(vec![two_mech_budget(env, priors, &values, budgets, choice)?.welfare])
    })?;
    Ok(est[0])
}

pub fn two_mech(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let trials = cfg.trials_or(200_000);
    let mut rows = Vec::new();
    for (k, inst) in instances(cfg)?.iter().enumerate() {
        let env = inst.environment()?;
        let priors = discrete_priors(inst)?;
        let dists = inst.dists()?;
        let budgets = inst.fixed_budgets()?;
        let factor = approximation_factor(target_alpha(cfg, &inst.priors)?, 1.0);
        let upper = efficient_welfare(&env, &priors)?;
        let exact = exact_expectation(&priors, |v| {
            let reserve = two_mech_budget(&env, &dists, v, &budgets, TwoMechChoice::ReserveWeighted);
            let capped = two_mech_budget(&env, &dists, v, &budgets, TwoMechChoice::CappedMyerson);
            match (reserve, capped) {
                (Ok(a), Ok(b)) => (a.welfare + b.welfare) / 2.0,
                _ => f64::NAN,
            }
        })?;
        let est = coin_flip_welfare(&env, &dists, &dists, &budgets, trials, derive_seed(cfg.master_seed, k as u64))?;
        rows.push(Row::info(format!("efficient_welfare_{k}"), upper));
        rows.push(Row::info(format!("exact_welfare_{k}"), exact));
        rows.push(Row::at_least(format!("welfare_{k}"), &est, upper / factor));
    }
    Ok(rows)
}

pub fn two_mech_sampled(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let trials = cfg.trials_or(200_000);
    let sample = cfg.sample_or(SampleSpec::new(0.1, 0.01, 0.01));
    let params = sample.params()?;
    let mut rows = vec![Row::info("sample_count", params.m as f64)];
    for (k, inst) in instances(cfg)?.iter().enumerate() {
        let env = inst.environment()?;
        let priors = discrete_priors(inst)?;
        let dists = inst.dists()?;
        let budgets = inst.fixed_budgets()?;
        let alpha = target_alpha(cfg, &inst.priors)?;
        let mut rng = stream_rng(derive_seed(cfg.master_seed, 200), k as u64);
        let models = dists
            .iter()
            .map(|d| Ok(EmpiricalModel::build(&d.sample(&mut rng, params.m), &params)?))
            .collect::<Result<Vec<_>>>()?;
        // The learned Myerson auction's revenue shortfall, measured exactly.
        let full = exact_expectation(&priors, |v| myerson(&env, &dists, v).map_or(f64::NAN, |o| o.revenue))?;
        let learned = exact_expectation(&priors, |v| myerson(&env, &models, v).map_or(f64::NAN, |o| o.revenue))?;
        let epsilon = (1.0 - learned / full).max(0.0);
        let shrink = (1.0 - epsilon) * (1.0 - inst.bidders() as f64 * sample.delta);
        let factor = approximation_factor(alpha, shrink);
        let upper = efficient_welfare(&env, &priors)?;
        let est = coin_flip_welfare(&env, &models, &dists, &budgets, trials, derive_seed(cfg.master_seed, k as u64))?;
        rows.push(Row::info(format!("epsilon_{k}"), epsilon));
        rows.push(Row::info(format!("factor_{k}"), factor));
        rows.push(Row::at_least(format!("welfare_{k}"), &est, upper / factor));
    }
    Ok(rows)
}
