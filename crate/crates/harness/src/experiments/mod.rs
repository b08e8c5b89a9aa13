//! One experiment per guarantee, each returning verdict rows.

mod budget;
mod closed_form;
mod coverage;
mod lemmas;
mod lottery;
pub mod lp;
pub(crate) mod posted;
mod vcg;

use std::time::Instant;

use alphasr::dist::generator::random_alpha_sr;
use alphasr::{Discrete64, Dist64, DistSpec, EmpiricalModel, SampleParams};
use anyhow::{bail, Result};
use rand::Rng;

use crate::config::{ExperimentConfig, InstanceSpec};
use crate::mc::stream_rng;
use crate::report::{Report, Row};

pub const EXPERIMENT_IDS: [&str; 12] = [
    "closed-form",
    "lemma-suite",
    "lemma-square",
    "vcg-duplicates",
    "vcgl",
    "vcgl-samp",
    "two-mech",
    "two-mech-samp",
    "lottery",
    "coverage",
    "lp-suite",
    "posted-price",
];

pub fn run_experiment(id: &str, cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let rows: Vec<Row> = match id {
        "closed-form" => closed_form::run(cfg)?,
        "lemma-suite" => lemmas::suite(cfg)?,
        "lemma-square" => lemmas::square(cfg)?,
        "vcg-duplicates" => vcg::duplicates(cfg)?,
        "vcgl" => vcg::lazy(cfg)?,
        "vcgl-samp" => vcg::lazy_sampled(cfg)?,
        "two-mech" => budget::two_mech(cfg)?,
        "two-mech-samp" => budget::two_mech_sampled(cfg)?,
        "lottery" => lottery::run(cfg)?,
        "coverage" => coverage::run(cfg)?,
        "lp-suite" => lp::run(cfg)?,
        "posted-price" => posted::run(cfg)?,
        other => bail!("unknown experiment '{other}'; valid ids: {}", EXPERIMENT_IDS.join(", ")),
    };
    Ok(Report {
        experiment_id: id.to_string(),
        seed: cfg.master_seed,
        rows,
        runtime: start.elapsed(),
    })
}

/// `α^{1/(1-α)}`, the sale probability at the reserve of the power-law prior.
pub(crate) fn reserve_floor(alpha: f64) -> f64 {
    alpha.powf(1.0 / (1.0 - alpha))
}

pub(crate) fn falpha(alpha: f64) -> DistSpec {
    DistSpec::Falpha { alpha, scale: 1.0 }
}

pub(crate) fn discrete_spec(d: &Discrete64) -> DistSpec {
    DistSpec::Discrete {
        support: d.support().to_vec(),
        pmf: d.pmf().to_vec(),
    }
}

/// The instance from the config, or `default` when none is given.
pub(crate) fn instance_or(cfg: &ExperimentConfig, default: impl FnOnce() -> InstanceSpec) -> InstanceSpec {
    cfg.instance.clone().unwrap_or_else(default)
}

/// Common `α` of power-law priors, or the config's `alpha` when priors are discrete.
pub(crate) fn target_alpha(cfg: &ExperimentConfig, priors: &[DistSpec]) -> Result<f64> {
    let mut seen = priors.iter().filter_map(|p| match p {
        DistSpec::Falpha { alpha, .. } => Some(*alpha),
        _ => None,
    });
    match (cfg.alpha, seen.next()) {
        (Some(a), _) => Ok(a),
        (None, Some(a)) if seen.all(|b| b == a) => Ok(a),
        (None, Some(_)) => bail!("power-law priors disagree on alpha; set \"alpha\" in the config"),
        (None, None) => Ok(0.5),
    }
}

/// Bidders sharing a prior form one class; returns each bidder's class index.
pub(crate) fn classes(priors: &[DistSpec]) -> (Vec<usize>, usize) {
    let mut keys: Vec<String> = Vec::new();
    let of = priors
        .iter()
        .map(|p| {
            let key = serde_json::to_string(p).expect("specs serialize");
            keys.iter().position(|k| *k == key).unwrap_or_else(|| {
                keys.push(key);
                keys.len() - 1
            })
        })
        .collect();
    (of, keys.len())
}

/// A sample model of `truth` built from `p.m` draws of `rng`.
pub(crate) fn sample_model<R: Rng + ?Sized>(truth: &Dist64, p: &SampleParams, rng: &mut R) -> Result<EmpiricalModel<f64>> {
    Ok(EmpiricalModel::build(&truth.sample(rng, p.m), p)?)
}

/// Discrete strongly regular priors on `{1..levels}`, reproducible from `(seed, label)`.
pub fn generated_priors(seed: u64, label: u64, alpha: f64, levels: usize, count: usize) -> Result<Vec<Discrete64>> {
    let mut rng = stream_rng(seed, label);
    (0..count).map(|_| Ok(random_alpha_sr(&mut rng, alpha, levels)?)).collect()
}

/// Draws one value per bidder.
pub(crate) fn draw_values<R: Rng + ?Sized>(dists: &[Dist64], rng: &mut R) -> Vec<f64> {
    dists.iter().map(|d| d.draw(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_ids_list_the_valid_ones() {
        let err = run_experiment("nope", &ExperimentConfig::default()).unwrap_err().to_string();
        for id in EXPERIMENT_IDS {
            assert!(err.contains(id));
        }
    }

    #[test]
    fn classes_group_identical_priors() {
        let (of, k) = classes(&[falpha(0.5), falpha(0.3), falpha(0.5)]);
        assert_eq!((of, k), (vec![0, 1, 0], 2));
    }
}
