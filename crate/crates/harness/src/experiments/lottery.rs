//! Lotteries for bidders with private budgets, against the optimal revenue of
//! the budget-capped values.

use alphasr::mech::{lottery_mechanism, Environment};
use alphasr::{DistSpec, Dist64};
use anyhow::{ensure, Result};

use super::{classes, draw_values, falpha, instance_or, reserve_floor, sample_model, target_alpha};
use crate::config::{ExperimentConfig, InstanceSpec, SampleSpec};
use crate::mc::{derive_seed, monte_carlo, Stats};
use crate::oracle::{capped_prior, myerson_revenue_bound};
use crate::report::Row;

/// Grid cells per unit of the largest budget when discretising capped values.
const GRID_CELLS: f64 = 4000.0;

fn default_instance() -> InstanceSpec {
    let mut inst = InstanceSpec::single_item(vec![falpha(0.5); 2]);
    inst.environment = Some(Environment::k_uniform(2, 1));
    let budget = DistSpec::Discrete {
        support: vec![0.5, 2.0],
        pmf: vec![0.5, 0.5],
    };
    inst.budget_priors = Some(vec![budget; 2]);
    inst
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let inst = instance_or(cfg, default_instance);
    let env = inst.environment()?;
    let dists = inst.dists()?;
    let budget_priors = inst.budget_dists()?;
    let budget_dists: Vec<Dist64> = budget_priors.iter().cloned().map(Dist64::from).collect();
    let alpha = target_alpha(cfg, &inst.priors)?;
    let floor = reserve_floor(alpha);

    let top = budget_priors.iter().map(|b| b.max_value()).fold(0.0, f64::max);
    let capped = dists
        .iter()
        .zip(&budget_priors)
        .map(|(d, b)| capped_prior(d, b, top / GRID_CELLS))
        .collect::<Result<Vec<_>>>()?;
    let optimum = myerson_revenue_bound(&capped);
    let mut rows = vec![Row::info("capped_optimum_upper_bound", optimum)];

    let trials = cfg.trials_or(1_000_000);
    let reserves = dists.iter().map(Dist64::reserve_price).collect::<alphasr::Result<Vec<_>>>()?;
    let est = monte_carlo(trials, derive_seed(cfg.master_seed, 0), 1, |rng| {
        let values = draw_values(&dists, rng);
        let budgets = draw_values(&budget_dists, rng);
        Ok(vec![lottery_mechanism(&env, &values, &budgets, &reserves, rng)?.revenue])
    })?;
    let full_factor = 3.0 * (1.0 + 1.0 / floor);
    rows.push(Row::info("full_information_factor", full_factor));
    rows.push(Row::at_least("revenue_full_information", &est[0], optimum / full_factor));

    let sample = cfg.sample_or(SampleSpec::new(0.05, 0.05, 0.05));
    let params = sample.params()?;
    let (class_of, class_count) = classes(&inst.priors);
    let loss = (8.0 * sample.gamma / alpha).sqrt().max(4.0 * sample.gamma + sample.xi * sample.gamma);
    let denominator = floor * (1.0 - loss);
    ensure!(denominator > 0.0, "sampling accuracy too coarse for a finite guarantee");
    let sample_factor = 3.0 / (1.0 - class_count as f64 * sample.delta) * (1.0 + 1.0 / denominator);
    let resamples = cfg.resamples_or(20) as u64;
    let auctions = (trials / resamples).max(1);
    let representatives: Vec<usize> = (0..class_count)
        .map(|c| class_of.iter().position(|&x| x == c).expect("class has a bidder"))
        .collect();
    // One trial per resample: learn reserves, then run the auctions on the same stream.
    let per_resample = monte_carlo(resamples, derive_seed(cfg.master_seed, 1), 1, |rng| {
        let models = representatives
            .iter()
            .map(|&i| sample_model(&dists[i], &params, rng))
            .collect::<Result<Vec<_>>>()?;
        let learned: Vec<f64> = class_of.iter().map(|&c| models[c].empirical_reserve()).collect();
        let mut revenue = Stats::default();
        for _ in 0..auctions {
            let values = draw_values(&dists, rng);
            let budgets = draw_values(&budget_dists, rng);
            revenue.push(lottery_mechanism(&env, &values, &budgets, &learned, rng)?.revenue);
        }
        Ok(vec![revenue.estimate().mean])
    })?;
    rows.push(Row::info("sample_count", params.m as f64));
    rows.push(Row::info("sampled_factor", sample_factor));
    rows.push(Row::at_least("revenue_sampled", &per_resample[0], optimum / sample_factor));
    Ok(rows)
}
