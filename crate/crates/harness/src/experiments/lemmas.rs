//! Structural inequalities checked over a family of strongly regular priors.

use alphasr::dist::generator::random_alpha_sr;
use alphasr::lp::{aggregate, mirror_below_reserve, threshold_vector, MultiItemInstance};
use alphasr::{Discrete64, Dist64, EmpiricalModel, SampleParams};
use anyhow::Result;

use super::reserve_floor;
use crate::config::ExperimentConfig;
use crate::mc::{derive_seed, monte_carlo, stream_rng};
use crate::report::Row;

/// Every margin must reach this.
const MARGIN_TOL: f64 = -1e-8;
const SQUARE_TOL: f64 = 1e-9;
const ANALYTIC: [(f64, f64); 5] = [(0.1, 1.0), (0.3, 2.0), (0.5, 0.5), (0.7, 1.0), (0.9, 3.0)];
const CONDITIONED_ALPHAS: [f64; 3] = [0.6, 0.75, 0.9];
const CONDITIONED_CUTS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

struct Member {
    dist: Dist64,
    alpha: f64,
}

/// Twenty generated discrete priors followed by five power-law priors.
fn family(seed: u64) -> Result<Vec<Member>> {
    let mut rng = stream_rng(derive_seed(seed, 1), 0);
    let mut out = Vec::new();
    for k in 0..20 {
        let alpha = ANALYTIC[k % 5].0;
        let d = random_alpha_sr(&mut rng, alpha, 2 + k % 7)?;
        out.push(Member { dist: d.into(), alpha });
    }
    for (alpha, scale) in ANALYTIC {
        out.push(Member {
            dist: Dist64::falpha(alpha, scale)?,
            alpha,
        });
    }
    Ok(out)
}

/// Running minimum and check count per named margin, in first-seen order.
#[derive(Default)]
struct Margins(Vec<(&'static str, f64, u64)>);

impl Margins {
    fn record(&mut self, name: &'static str, margin: f64) {
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        match self.0.iter_mut().find(|(n, _, _)| *n == name) {
            Some(entry) => {
                entry.1 = entry.1.min(margin);
                entry.2 += 1;
            }
            None => self.0.push((name, margin, 1)),
        }
    }

    fn rows(self, floor: f64) -> Vec<Row> {
        self.0
            .into_iter()
            .map(|(name, m, n)| Row::value_at_least(name, m, floor).with_trials(n))
            .collect()
    }
}

fn sale_probability(d: &Dist64, v: f64) -> f64 {
    d.as_discrete().map_or_else(|| d.survival(v), |dd| dd.sale_probability(v))
}

/// Values spread over the bulk of a continuous prior.
fn bulk_values(d: &Dist64, points: usize) -> Vec<f64> {
    (1..points)
        .filter_map(|k| d.value_of_quantile(1.0 - k as f64 / points as f64).ok())
        .collect()
}

fn prior_margins(m: &Member, margins: &mut Margins, hazard_error: &mut f64) -> Result<()> {
    let (d, alpha) = (&m.dist, m.alpha);
    let floor = reserve_floor(alpha);
    let r = d.reserve_price()?;
    margins.record("reserve_sale_probability", sale_probability(d, r) - floor);

    let t_max = match d.as_discrete() {
        Some(dd) => dd.max_value(),
        None => d.value_of_quantile(1e-3)?,
    };
    for k in 0..=50 {
        let t = t_max * k as f64 / 50.0;
        margins.record("reserve_welfare", d.revenue_at_price(t.max(r)) - floor * d.posted_price_welfare(t));
    }

    let (i1, i2) = (d.survival_power_integral(1), d.survival_power_integral(2));
    margins.record("square", i2 - alpha / (1.0 + alpha) * i1);
    margins.record("max_min", (2.0 + alpha) / alpha * i2 - (2.0 * i1 - i2));
    let strong = (alpha / (2.0 - alpha)).powf(1.0 / (1.0 - alpha));
    margins.record("strong_virtual_mass", d.strong_virtual_probability(alpha) - strong);
    margins.record("alpha_sr", d.check_alpha_sr(alpha, 200).margin.unwrap_or(0.0));
    let scaled = d.scaled(2.5)?.reserve_price()?;
    margins.record("reserve_scaling", -(scaled - 2.5 * r).abs() / scaled);

    let values = match d.as_discrete() {
        Some(dd) => dd.support().to_vec(),
        None => bulk_values(d, 20),
    };
    for &v in values.iter().filter(|&&v| v >= r) {
        margins.record("reserve_virtual", r + d.virtual_valuation(v)? / alpha - v);
    }
    for (a, &v1) in values.iter().enumerate() {
        for &v2 in &values[a..] {
            let (Some(h1), Some(h2)) = (d.hazard_rate(v1)?, d.hazard_rate(v2)?) else {
                continue;
            };
            let lower = 1.0 / ((1.0 - alpha) * (v2 - v1) + 1.0 / h1);
            margins.record("hazard_lower", h2 - lower);
            let gap = 1.0 / h2 - (1.0 - alpha) * (v2 - v1);
            if gap > 0.0 {
                margins.record("hazard_upper", 1.0 / gap - h1);
            }
        }
    }

    if d.as_discrete().is_none() {
        for v in bulk_values(d, 40) {
            *hazard_error = hazard_error.max(((-d.cumulative_hazard(v)).exp() - d.survival(v)).abs());
        }
        let density_at = |q: f64| d.value_of_quantile(q).map(|v| d.density(v));
        let grid: Vec<f64> = (1..=30).map(|k| k as f64 / 31.0).collect();
        for &q0 in &grid {
            for &q in grid.iter().filter(|&&q| q <= q0) {
                margins.record("density", density_at(q)? - density_at(q0)? * (q / q0).powf(2.0 - alpha));
            }
        }
        let qr = d.survival(r);
        let cr_r = d.revenue_curve(qr).cr;
        for k in 1..=50 {
            let x = k as f64 / 50.0;
            let bound = cr_r * (x.powf(alpha) - alpha * x) / (1.0 - alpha);
            margins.record("revenue_below_reserve", bound - d.revenue_curve(qr * x).cr);
        }
    }
    Ok(())
}

fn empirical_margins(m: &Member, seed: u64, k: u64, margins: &mut Margins) -> Result<()> {
    let p = SampleParams::new(2000, 0.1, 0.05, 0.05)?;
    let samples = m.dist.sample(&mut stream_rng(derive_seed(seed, 2), k), p.m);
    let em = EmpiricalModel::build(&samples, &p)?;
    for w in em.envelope().slopes().windows(2) {
        margins.record("envelope_concave", w[0] - w[1]);
    }
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let cap = sorted[sorted.len() / 2];
    let capped: Vec<f64> = samples.iter().map(|v| v.min(cap)).collect();
    let ec = EmpiricalModel::build(&capped, &p)?;
    for j in 0..=200 {
        let q = j as f64 / 200.0;
        margins.record("envelope_dominates", em.envelope_revenue(q) - em.raw_revenue(q));
        margins.record("capped_envelope", cap * q - ec.envelope_revenue(q));
    }
    Ok(())
}

fn lp_margins(members: &[Member], margins: &mut Margins) -> Result<()> {
    let discrete: Vec<_> = members.iter().filter_map(|m| m.dist.as_discrete()).collect();
    for d in &discrete {
        for cut in 0..d.len() {
            for w in [0.0, 0.25, 1.0] {
                let x = threshold_vector(d.support(), d.support()[cut], w);
                let mass: f64 = d.pmf().iter().zip(&x).map(|(f, x)| f * x).sum();
                let contribution: f64 = (0..d.len()).map(|k| d.pmf()[k] * d.virtual_value_at(k) * x[k]).sum();
                margins.record("threshold_identity", -(contribution - d.revenue_curve(mass)).abs());
            }
        }
        let qr = d.sale_probability(d.reserve_price()?);
        for k in 0..=20 {
            let q = k as f64 / 20.0;
            let mirrored = mirror_below_reserve(d, q)?;
            margins.record("mirror_revenue", -(d.revenue_curve(mirrored) - d.revenue_curve(q)).abs());
            margins.record("mirror_below_reserve", qr - mirrored);
        }
    }
    for group in discrete.chunks_exact(4) {
        let priors = vec![vec![group[0].clone(), group[1].clone()], vec![group[2].clone(), group[3].clone()]];
        let inst = MultiItemInstance::truncated(priors, vec![3.0, 4.0], vec![1, 2])?;
        let lp = inst.build_lp2();
        let sol = lp.solve(1e-12)?;
        let agg = aggregate(&lp, &sol.x, 1e-12)?;
        margins.record("aggregate_objective", -(agg.objective - sol.objective).abs());
        margins.record("aggregate_feasible", lp.slacks(&agg.representative).min_slack().unwrap_or(0.0));
    }
    Ok(())
}

pub fn suite(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let members = family(cfg.master_seed)?;
    let mut margins = Margins::default();
    let mut hazard_error: f64 = 0.0;
    for (k, m) in members.iter().enumerate() {
        prior_margins(m, &mut margins, &mut hazard_error)?;
        empirical_margins(m, cfg.master_seed, k as u64, &mut margins)?;
    }
    lp_margins(&members, &mut margins)?;
    for k in 1..100 {
        let a = k as f64 / 100.0;
        margins.record("alpha_power", a.powf(-1.0 / (1.0 - a)) - (a + 1.0) / a);
    }
    let mut rows = margins.rows(MARGIN_TOL);
    rows.push(Row::value_at_most("hazard_identity_error", hazard_error, 1e-6));

    let trials = cfg.trials_or(1_000_000);
    for (k, alpha) in CONDITIONED_ALPHAS.into_iter().enumerate() {
        let d = Dist64::falpha(alpha, 1.0)?;
        let factor = (2.0 + alpha) / alpha;
        let est = monte_carlo(trials, derive_seed(cfg.master_seed, 10 + k as u64), CONDITIONED_CUTS.len(), |rng| {
            let top = d.draw(rng).max(d.draw(rng));
            let gap = factor * d.virtual_valuation(top)? - top;
            Ok(CONDITIONED_CUTS.iter().map(|&t| if top >= t { gap } else { f64::NAN }).collect())
        })?;
        for (t, e) in CONDITIONED_CUTS.iter().zip(&est) {
            rows.push(Row::at_least(format!("conditioned_alpha{alpha}_t{t}"), e, 0.0));
        }
    }
    Ok(rows)
}

pub fn square(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut rng = stream_rng(derive_seed(cfg.master_seed, 3), 0);
    let mut margin = f64::INFINITY;
    let mut tightness: f64 = 0.0;
    let mut checks = 0;
    for k in 1..20 {
        let alpha = k as f64 / 20.0;
        let f = Dist64::falpha(alpha, 1.0)?;
        let (i1, i2) = (f.survival_power_integral(1), f.survival_power_integral(2));
        tightness = tightness.max((i2 / i1 - alpha / (1.0 + alpha)).abs());
        for levels in [3, 6] {
            let d: Discrete64 = random_alpha_sr(&mut rng, alpha, levels)?;
            let (i1, i2) = (d.survival_power_integral(1), d.survival_power_integral(2));
            margin = margin.min(i2 - alpha / (1.0 + alpha) * i1);
            checks += 1;
        }
    }
    Ok(vec![
        Row::value_at_least("square_margin", margin, -SQUARE_TOL).with_trials(checks),
        Row::value_at_most("square_tightness_error", tightness, SQUARE_TOL).with_trials(19),
    ])
}
