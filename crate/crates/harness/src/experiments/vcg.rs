//! Clarke-pivot auctions: with duplicated bidders, with lazy reserves, and
//! with reserves learned from samples.

use alphasr::mech::{vcg, vcg_lazy, vcg_with_duplicates, Environment};
use alphasr::{Discrete64, Dist64, DistSpec};
use anyhow::{bail, Result};

use super::{classes, draw_values, falpha, instance_or, reserve_floor, sample_model, target_alpha};
use crate::config::{ExperimentConfig, InstanceSpec, SampleSpec};
use crate::mc::{derive_seed, monte_carlo, Stats};
use crate::oracle::{myerson_revenue_bound, power_law_optimal_revenue};
use crate::report::Row;

/// Optimal single-item revenue for i.i.d. power-law or independent discrete priors.
fn single_item_optimum(priors: &[DistSpec]) -> Result<f64> {
    if let Some(DistSpec::Falpha { alpha, scale }) = priors.first() {
        if priors.iter().all(|p| p == &priors[0]) {
            return Ok(power_law_optimal_revenue(*alpha, *scale, priors.len() as u32));
        }
    }
    let discrete: Option<Vec<Discrete64>> = priors
        .iter()
        .map(|p| match p {
            DistSpec::Discrete { support, pmf } => Discrete64::new(support.clone(), pmf.clone()).ok(),
            _ => None,
        })
        .collect();
    match discrete {
        Some(d) => Ok(myerson_revenue_bound(&d)),
        None => bail!("the optimum is available for i.i.d. power-law or discrete priors only"),
    }
}

pub fn duplicates(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let instances = match &cfg.instance {
        Some(inst) => vec![inst.clone()],
        None => (1..=2).map(|n| InstanceSpec::single_item(vec![falpha(0.5); n])).collect(),
    };
    let trials = cfg.trials_or(1_000_000);
    let mut rows = Vec::new();
    for (k, inst) in instances.iter().enumerate() {
        let env = inst.environment()?;
        if env != Environment::single_item(inst.bidders()) {
            bail!("the duplicates experiment runs single-item instances");
        }
        let alpha = target_alpha(cfg, &inst.priors)?;
        let dists = inst.dists()?;
        let opt = single_item_optimum(&inst.priors)?;
        let factor = (2.0 + alpha) / alpha;
        let est = monte_carlo(trials, derive_seed(cfg.master_seed, k as u64), 1, |rng| {
            let values = draw_values(&dists, rng);
            let copies = draw_values(&dists, rng);
            Ok(vec![vcg_with_duplicates(&env, &values, &copies)?.revenue])
        })?;
        let n = inst.bidders();
        rows.push(Row::info(format!("optimal_revenue_n{n}"), opt));
        rows.push(Row::at_least(format!("revenue_n{n}"), &est[0], opt / factor));
        rows.push(Row::info(format!("optimum_over_revenue_n{n}"), opt / est[0].mean));
    }
    Ok(rows)
}

pub fn lazy(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let cases: Vec<(String, InstanceSpec)> = match &cfg.instance {
        Some(inst) => vec![("configured".into(), inst.clone())],
        None => {
            let mut k2 = InstanceSpec::single_item(vec![falpha(0.5); 3]);
            k2.environment = Some(Environment::k_uniform(3, 2));
            vec![
                ("single_item".into(), InstanceSpec::single_item(vec![falpha(0.5); 2])),
                ("two_uniform".into(), k2),
                ("one_bidder".into(), InstanceSpec::single_item(vec![falpha(0.5)])),
            ]
        }
    };
    let trials = cfg.trials_or(1_000_000);
    let mut rows = Vec::new();
    for (k, (label, inst)) in cases.iter().enumerate() {
        let env = inst.environment()?;
        let dists = inst.dists()?;
        let floor = reserve_floor(target_alpha(cfg, &inst.priors)?);
        let reserves = dists.iter().map(Dist64::reserve_price).collect::<alphasr::Result<Vec<_>>>()?;
        let est = monte_carlo(trials, derive_seed(cfg.master_seed, k as u64), 3, |rng| {
            let values = draw_values(&dists, rng);
            let revenue = vcg_lazy(&env, &values, &reserves)?.revenue;
            let welfare = vcg(&env, &values)?.welfare;
            Ok(vec![revenue - floor * welfare, revenue, welfare])
        })?;
        let gap = format!("revenue_minus_scaled_welfare_{label}");
        if label == "one_bidder" {
            rows.push(Row::consistent_with(gap, &est[0], 0.0));
        } else {
            rows.push(Row::at_least(gap, &est[0], 0.0));
        }
        rows.push(Row::estimate_info(format!("revenue_{label}"), &est[1]));
        rows.push(Row::estimate_info(format!("welfare_{label}"), &est[2]));
    }
    Ok(rows)
}

pub fn lazy_sampled(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let inst = instance_or(cfg, || InstanceSpec::single_item(vec![falpha(0.5); 2]));
    let env = inst.environment()?;
    let dists = inst.dists()?;
    let floor = reserve_floor(target_alpha(cfg, &inst.priors)?);
    let (class_of, class_count) = classes(&inst.priors);
    let sample = cfg.sample_or(SampleSpec::new(0.1, 0.01, 0.01));
    let params = sample.params()?;
    let (gamma, xi, delta) = (sample.gamma, sample.xi, sample.delta);
    let factor = floor * (1.0 - xi * (1.0 + gamma).powi(2)) * (1.0 - class_count as f64 * delta) / (1.0 + gamma).powi(4);
    let resamples = cfg.resamples_or(100) as u64;
    let auctions = cfg.trials_or(100_000);
    let representatives: Vec<usize> = (0..class_count).map(|c| class_of.iter().position(|&x| x == c).expect("class has a bidder")).collect();
    // One trial per resample: learn reserves, then run the auctions on the same stream.
    let est = monte_carlo(resamples, derive_seed(cfg.master_seed, 0), 3, |rng| {
        let models = representatives
            .iter()
            .map(|&i| sample_model(&dists[i], &params, rng))
            .collect::<Result<Vec<_>>>()?;
        let reserves: Vec<f64> = class_of.iter().map(|&c| models[c].empirical_reserve()).collect();
        let covered = class_of
            .iter()
            .zip(&dists)
            .all(|(&c, d)| models[c].coverage_event_holds(d, gamma));
        let mut gap = Stats::default();
        let mut revenue = Stats::default();
        for _ in 0..auctions {
            let values = draw_values(&dists, rng);
            let r = vcg_lazy(&env, &values, &reserves)?.revenue;
            gap.push(r - factor * vcg(&env, &values)?.welfare);
            revenue.push(r);
        }
        Ok(vec![gap.estimate().mean, revenue.estimate().mean, if covered { 1.0 } else { 0.0 }])
    })?;
    Ok(vec![
        Row::info("sample_count", params.m as f64),
        Row::info("welfare_factor", factor),
        Row::at_least("revenue_minus_scaled_welfare", &est[0], 0.0),
        Row::estimate_info("revenue", &est[1]),
        Row::estimate_info("coverage_fraction", &est[2]),
    ])
}
