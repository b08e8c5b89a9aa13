//! The simplex solver against vertex enumeration, and the empirical allocation
//! LP's prices checked against the true LP.

use alphasr::lp::{aggregate, LpProblem, MultiItemInstance, PricingPlan, QuantileSolution};
use alphasr::{Dist64, EmpiricalModel, SampleParams};
use anyhow::Result;
use rand::Rng;

use super::generated_priors;
use crate::config::{ExperimentConfig, SampleSpec};
use crate::mc::{derive_seed, stream_rng};
use crate::oracle::lp_vertex_optimum;
use crate::report::Row;

pub const SOLVER_TOL: f64 = 1e-10;
const RANDOM_LPS: u64 = 50;
const AGREEMENT_TOL: f64 = 1e-8;
const SLACK_TOL: f64 = 1e-9;
const MAX_ATTEMPTS: usize = 300;

/// Two bidders and two items with generated priors on `{1..4}`, budgets `(3, 4)`
/// and item limits `(1, 2)`, or the configured multi-item instance.
pub fn multi_item_instance(cfg: &ExperimentConfig, seed: u64, label: u64) -> Result<MultiItemInstance<f64>> {
    if let Some(inst) = cfg.instance.as_ref().filter(|i| i.items.is_some()) {
        return inst.multi_item();
    }
    let mut priors = generated_priors(seed, label, 0.5, 4, 4)?;
    let second = priors.split_off(2);
    Ok(MultiItemInstance::truncated(vec![priors, second], vec![3.0, 4.0], vec![1, 2])?)
}

/// The true LP's optimum value and its quantile aggregate.
pub fn solve_true_lp(inst: &MultiItemInstance<f64>) -> Result<(LpProblem<f64>, f64, QuantileSolution<f64>)> {
    let lp = inst.build_lp2();
    let sol = lp.solve(SOLVER_TOL)?;
    let agg = aggregate(&lp, &sol.x, SOLVER_TOL)?;
    Ok((lp, sol.objective, agg))
}

/// One sample model per pair, and whether every pair's coverage event holds.
pub fn pair_models<R: Rng + ?Sized>(
    inst: &MultiItemInstance<f64>,
    params: &SampleParams,
    gamma: f64,
    rng: &mut R,
) -> Result<(Vec<Vec<EmpiricalModel<f64>>>, bool)> {
    let mut covered = true;
    let models = inst
        .priors
        .iter()
        .map(|row| {
            row.iter()
                .map(|d| {
                    let truth = Dist64::from(d.clone());
                    let model = EmpiricalModel::build(&truth.sample(rng, params.m), params)?;
                    covered &= model.coverage_event_holds(&truth, gamma);
                    Ok(model)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((models, covered))
}

/// `(1 - c ξ̄)(1 - c' ξ̄)/(1+γ)^9`, the part of the loss factor shared by the
/// LP bound and the posted-price revenue target.
pub fn base_loss(plan: &PricingPlan) -> f64 {
    (1.0 - plan.c * plan.xi_bar) * (1.0 - plan.c_prime * plan.xi_bar) / (1.0 + plan.gamma).powi(9)
}

fn random_lp<R: Rng + ?Sized>(rng: &mut R) -> Result<LpProblem<f64>> {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=4);
    let objective = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
    let rows = (0..m)
        .map(|_| ((0..n).map(|_| rng.gen_range(-1.0..2.0)).collect(), rng.gen_range(0.1..3.0)))
        .collect();
    let upper = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
    Ok(LpProblem::generic(objective, rows, upper)?)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut rng = stream_rng(derive_seed(cfg.master_seed, 0), 0);
    let mut worst: f64 = 0.0;
    for _ in 0..RANDOM_LPS {
        let lp = random_lp(&mut rng)?;
        let simplex = lp.solve(SOLVER_TOL)?.objective;
        worst = worst.max((simplex - lp_vertex_optimum(&lp)?).abs());
    }
    let mut rows = vec![Row::value_at_most("simplex_vertex_max_error", worst, AGREEMENT_TOL).with_trials(RANDOM_LPS)];

    let sample = cfg.sample_or(SampleSpec::new(0.1, 0.01, 0.01));
    let params = sample.params()?;
    let wanted = cfg.resamples_or(100);
    let instance_seed = derive_seed(cfg.master_seed, 1);
    let sample_seed = derive_seed(cfg.master_seed, 2);
    let (mut covered, mut attempts) = (0, 0);
    let (mut min_slack, mut min_margin, mut min_proof_margin) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    while covered < wanted && attempts < MAX_ATTEMPTS {
        let label = attempts as u64;
        attempts += 1;
        let inst = multi_item_instance(cfg, instance_seed, label)?;
        let (models, ok) = pair_models(&inst, &params, sample.gamma, &mut stream_rng(sample_seed, label))?;
        if !ok {
            continue;
        }
        covered += 1;
        let (lp2, v2, _) = solve_true_lp(&inst)?;
        let lp3 = inst.build_lp3(&models)?;
        let sol3 = lp3.solve(SOLVER_TOL)?;
        let agg3 = aggregate(&lp3, &sol3.x, SOLVER_TOL)?;
        let plan = PricingPlan::empirical(&inst, &models, &agg3, sample.gamma)?;
        let witness = plan.witness();
        let slack = plan.check_lp2_feasible(&lp2)?.min_slack().unwrap_or(0.0);
        let g = 1.0 + sample.gamma;
        let xi = plan.xi_bar;
        let factor = base_loss(&plan) * (1.0 - xi * g * g) * (1.0 - xi * g * g * g);
        // True masses weighted by empirical virtual values.
        let v3: f64 = (0..witness.len())
            .map(|k| lp2.vars[k].mass * lp3.vars[k].virtual_value * witness[k])
            .sum();
        min_slack = min_slack.min(slack);
        min_margin = min_margin.min(v3 - factor * v2);
        min_proof_margin = min_proof_margin.min(plan.witness_value(&lp2)? - factor * v2);
    }
    let n = covered as u64;
    rows.push(Row::info("covered_builds", covered as f64).with_trials(attempts as u64));
    rows.push(Row::value_at_least("covered_builds_reached", covered as f64, wanted as f64));
    if covered > 0 {
        rows.push(Row::value_at_least("witness_min_slack", min_slack, -SLACK_TOL).with_trials(n));
        rows.push(Row::value_at_least("empirical_value_min_margin", min_margin, -SLACK_TOL).with_trials(n));
        rows.push(Row::info("true_value_min_margin", min_proof_margin).with_trials(n));
    }
    Ok(rows)
}
