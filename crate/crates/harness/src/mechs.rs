//! Runs one mechanism on a configured instance and reports its revenue and welfare.

use alphasr::lp::{aggregate, PricingPlan};
use alphasr::mech::{
    empirical_vcg_lazy, lottery_mechanism, myerson, two_mech_budget, vcg, vcg_lazy, vcg_with_duplicates,
    TwoMechChoice,
};
use alphasr::Dist64;
use anyhow::{bail, Result};
use rand::Rng;

use crate::config::{ExperimentConfig, InstanceSpec, SampleSpec};
use crate::experiments::lp::{pair_models, solve_true_lp, SOLVER_TOL};
use crate::experiments::posted::simulate;
use crate::experiments::{classes, draw_values, falpha, instance_or, sample_model};
use crate::mc::{derive_seed, monte_carlo, stream_rng, Estimate};
use crate::report::{Report, Row};

pub const MECHANISMS: [&str; 9] = [
    "vcg", "vcg-dup", "vcgl", "vcgl-emp", "myerson", "two-mech", "lottery", "posted", "posted-emp",
];

fn reserves(dists: &[Dist64]) -> Result<Vec<f64>> {
    Ok(dists.iter().map(Dist64::reserve_price).collect::<alphasr::Result<Vec<_>>>()?)
}

pub fn run_mechanism(name: &str, cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let trials = cfg.trials_or(100_000);
    let seed = derive_seed(cfg.master_seed, 0);
    let inst = instance_or(cfg, || InstanceSpec::single_item(vec![falpha(0.5); 2]));
    let est: Vec<Estimate> = match name {
        "posted" | "posted-emp" => {
            let multi = inst.multi_item()?;
            let plan = if name == "posted" {
                let (_, _, agg) = solve_true_lp(&multi)?;
                PricingPlan::full_information(&multi, &agg)?
            } else {
                let sample = cfg.sample_or(SampleSpec::new(0.1, 0.01, 0.01));
                let mut rng = stream_rng(derive_seed(cfg.master_seed, 1), 0);
                let (models, _) = pair_models(&multi, &sample.params()?, sample.gamma, &mut rng)?;
                let lp3 = multi.build_lp3(&models)?;
                let agg = aggregate(&lp3, &lp3.solve(SOLVER_TOL)?.x, SOLVER_TOL)?;
                PricingPlan::empirical(&multi, &models, &agg, sample.gamma)?
            };
            simulate(&multi, &plan, trials, seed)?
        }
        _ => {
            let env = inst.environment()?;
            let dists = inst.dists()?;
            single_parameter(name, cfg, &inst, &env, &dists, trials, seed)?
        }
    };
    Ok(Report {
        experiment_id: format!("mech:{name}"),
        seed: cfg.master_seed,
        rows: vec![Row::estimate_info("revenue", &est[0]), Row::estimate_info("welfare", &est[1])],
        runtime: start.elapsed(),
    })
}

fn single_parameter(
    name: &str,
    cfg: &ExperimentConfig,
    inst: &InstanceSpec,
    env: &alphasr::mech::Environment,
    dists: &[Dist64],
    trials: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    let pair = |o: alphasr::mech::MechanismOutcome| Ok(vec![o.revenue, o.welfare]);
    match name {
        "vcg" => monte_carlo(trials, seed, 2, |rng| pair(vcg(env, &draw_values(dists, rng))?)),
        "vcg-dup" => monte_carlo(trials, seed, 2, |rng| {
            let values = draw_values(dists, rng);
            let copies = draw_values(dists, rng);
            pair(vcg_with_duplicates(env, &values, &copies)?)
        }),
        "vcgl" => {
            let r = reserves(dists)?;
            monte_carlo(trials, seed, 2, |rng| pair(vcg_lazy(env, &draw_values(dists, rng), &r)?))
        }
        "vcgl-emp" => {
            let sample = cfg.sample_or(SampleSpec::new(0.1, 0.01, 0.01));
            let params = sample.params()?;
            let (class_of, count) = classes(&inst.priors);
            let mut rng = stream_rng(derive_seed(cfg.master_seed, 1), 0);
            let models = (0..count)
                .map(|c| {
                    let i = class_of.iter().position(|&x| x == c).expect("class has a bidder");
                    sample_model(&dists[i], &params, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            let per_bidder: Vec<_> = class_of.iter().map(|&c| &models[c]).collect();
            monte_carlo(trials, seed, 2, |rng| pair(empirical_vcg_lazy(env, &draw_values(dists, rng), &per_bidder)?))
        }
        "myerson" => monte_carlo(trials, seed, 2, |rng| pair(myerson(env, dists, &draw_values(dists, rng))?)),
        "two-mech" => {
            let budgets = inst.fixed_budgets()?;
            monte_carlo(trials, seed, 2, |rng| {
                let choice = if rng.gen::<bool>() { TwoMechChoice::ReserveWeighted } else { TwoMechChoice::CappedMyerson };
                pair(two_mech_budget(env, dists, &draw_values(dists, rng), &budgets, choice)?)
            })
        }
        "lottery" => {
            let r = reserves(dists)?;
            let budget_dists: Vec<Dist64> = inst.budget_dists()?.into_iter().map(Dist64::from).collect();
            monte_carlo(trials, seed, 2, |rng| {
                let values = draw_values(dists, rng);
                let budgets = draw_values(&budget_dists, rng);
                pair(lottery_mechanism(env, &values, &budgets, &r, rng)?)
            })
        }
        other => bail!("unknown mechanism '{other}'; valid names: {}", MECHANISMS.join(", ")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_mechanism_lists_the_valid_ones() {
        let err = run_mechanism("nope", &ExperimentConfig::default()).unwrap_err().to_string();
        assert!(MECHANISMS.iter().all(|m| err.contains(m)));
    }

    #[test]
    fn second_price_revenue_of_two_power_law_bidders() {
        let cfg = ExperimentConfig {
            trials: Some(20_000),
            ..ExperimentConfig::default()
        };
        let report = run_mechanism("vcg", &cfg).unwrap();
        assert_eq!(report.experiment_id, "mech:vcg");
        assert!(report.row("revenue").unwrap().value > 0.0);
    }
}
