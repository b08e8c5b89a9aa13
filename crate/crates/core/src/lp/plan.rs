//! Per-pair posted prices derived from an allocation-LP optimum.

use super::builder::MultiItemInstance;
use super::quantile::{threshold_vector, PriceLadder, QuantileSolution};
use super::simplex::{LpProblem, SlackReport};
use crate::empirical::EmpiricalModel;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PairPlan {
    pub bidder: usize,
    pub item: usize,
    /// Aggregate quantile of the LP optimum for this pair.
    pub x_star: f64,
    /// Lifted quantile `max(x*, ξ̄(1+γ)²)`; equals `x*` with full information.
    pub z_star: f64,
    /// Value the price mixture targets: `w·r + (1 - w)(r + 1)`.
    pub target_value: f64,
    pub price: f64,
    /// Probability of posting `price` rather than `price + 1`.
    pub weight: f64,
    /// True probability that the pair's value is at least the posted price.
    pub sale_probability: f64,
    /// LP2 witness on the pair's true support, already scaled.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingPlan {
    pub pairs: Vec<PairPlan>,
    /// Probability that a pair is offered at all.
    pub p_offer: f64,
    /// `max(|I|, |J|)(1+γ)^4`.
    pub c: f64,
    /// `max(|I|, |J|)(1+γ)^2`.
    pub c_prime: f64,
    pub gamma: f64,
    /// Largest `ξ̄` over pairs; zero with full information.
    pub xi_bar: f64,
}

/// `(c, c', p_offer)` for the given instance size, `γ` and `ξ̄`.
pub fn plan_constants(bidders: usize, items: usize, gamma: f64, xi_bar: f64) -> (f64, f64, f64) {
    let size = bidders.max(items) as f64;
    let g2 = (1.0 + gamma).powi(2);
    let c = size * g2 * g2;
    (c, size * g2, (1.0 - c * xi_bar) / (4.0 * g2))
}

impl PricingPlan {
    /// Prices from an empirical-LP optimum and the per-pair sample models.
    pub fn empirical(
        inst: &MultiItemInstance<f64>,
        models: &[Vec<EmpiricalModel<f64>>],
        lp3: &QuantileSolution<f64>,
        gamma: f64,
    ) -> Result<Self> {
        let (ni, nj) = (inst.bidders(), inst.items());
        if models.len() != ni || models.iter().any(|row| row.len() != nj) {
            return Err(invalid("need one empirical model per pair"));
        }
        let xi_bar = models
            .iter()
            .flatten()
            .map(EmpiricalModel::xi_bar)
            .fold(0.0, f64::max);
        let (c, c_prime, p_offer) = plan_constants(ni, nj, gamma, xi_bar);
        let scale = (1.0 - c * xi_bar) / (1.0 + gamma).powi(2);
        let mut pairs = Vec::with_capacity(ni * nj);
        for i in 0..ni {
            for j in 0..nj {
                let model = &models[i][j];
                let truth = inst.prior(i, j);
                let x_star = lp3.x_star(i, j);
                let z_star = x_star.max(model.xi_bar() * (1.0 + gamma).powi(2)).min(1.0);
                // Mixing adjacent prices realises `z*` exactly under the empirical quantiles.
                let (price, weight) = PriceLadder::empirical(truth, model)?.decompose_quantile(z_star);
                let target_value = price + 1.0 - weight;
                let sale_probability =
                    weight * truth.sale_probability(price) + (1.0 - weight) * truth.sale_probability(price + 1.0);
                let witness = threshold_vector(truth.support(), price, weight)
                    .into_iter()
                    .map(|x| scale * x)
                    .collect();
                pairs.push(PairPlan {
                    bidder: i,
                    item: j,
                    x_star,
                    z_star,
                    target_value,
                    price,
                    weight,
                    sale_probability,
                    witness,
                });
            }
        }
        Ok(Self {
            pairs,
            p_offer,
            c,
            c_prime,
            gamma,
            xi_bar,
        })
    }

    /// Prices from a true-LP optimum: each pair's aggregate is realised exactly
    /// by mixing two adjacent integer prices. The offer probability is `1/4`.
    pub fn full_information(inst: &MultiItemInstance<f64>, lp2: &QuantileSolution<f64>) -> Result<Self> {
        let (ni, nj) = (inst.bidders(), inst.items());
        let mut pairs = Vec::with_capacity(ni * nj);
        for i in 0..ni {
            for j in 0..nj {
                let truth = inst.prior(i, j);
                let x_star = lp2.x_star(i, j);
                let (price, weight) = PriceLadder::new(truth)?.decompose_quantile(x_star);
                let sale_probability =
                    weight * truth.sale_probability(price) + (1.0 - weight) * truth.sale_probability(price + 1.0);
                pairs.push(PairPlan {
                    bidder: i,
                    item: j,
                    x_star,
                    z_star: x_star,
                    target_value: price + 1.0 - weight,
                    price,
                    weight,
                    sale_probability,
                    witness: threshold_vector(truth.support(), price, weight),
                });
            }
        }
        let (c, c_prime, p_offer) = plan_constants(ni, nj, 0.0, 0.0);
        Ok(Self {
            pairs,
            p_offer,
            c,
            c_prime,
            gamma: 0.0,
            xi_bar: 0.0,
        })
    }

    pub fn pair(&self, bidder: usize, item: usize) -> &PairPlan {
        self.pairs
            .iter()
            .find(|p| p.bidder == bidder && p.item == item)
            .unwrap_or_else(|| panic!("no plan for pair ({bidder}, {item})"))
    }

    /// The witness vectors concatenated in LP variable order.
    pub fn witness(&self) -> Vec<f64> {
        self.pairs.iter().flat_map(|p| p.witness.iter().copied()).collect()
    }

    /// Row and box slacks of the witness in the true-prior LP.
    pub fn check_lp2_feasible(&self, lp2: &LpProblem<f64>) -> Result<SlackReport<f64>> {
        let w = self.witness();
        if w.len() != lp2.num_vars() {
            return Err(invalid("plan does not match the LP's variables"));
        }
        Ok(lp2.slacks(&w))
    }

    /// Objective of the witness under the given LP's coefficients.
    pub fn witness_value(&self, lp: &LpProblem<f64>) -> Result<f64> {
        let w = self.witness();
        if w.len() != lp.num_vars() {
            return Err(invalid("plan does not match the LP's variables"));
        }
        Ok(lp.value(&w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;
    use crate::empirical::SampleParams;
    use crate::lp::quantile::aggregate;

    #[test]
    fn constants() {
        let (c, c_prime, p) = plan_constants(2, 2, 0.1, 0.001);
        assert!((c - 2.9282).abs() < 1e-12);
        assert!((c_prime - 2.42).abs() < 1e-12);
        let expected = (1.0 - 0.001 * 2.9282) / (4.0 * 1.21);
        assert!((p - expected).abs() < 1e-15);
        assert!((p - 0.206_006_6).abs() < 1e-7);
        assert_eq!(plan_constants(1, 1, 0.0, 0.0).2, 0.25);
    }

    fn instance() -> MultiItemInstance<f64> {
        let d = DiscreteDist::new(vec![1.0, 2.0, 3.0], vec![0.3, 0.4, 0.3]).unwrap();
        MultiItemInstance::new(vec![vec![d]], vec![10.0], vec![1]).unwrap()
    }

    #[test]
    fn full_information_plan_sells_at_the_lp_quantile() {
        let inst = instance();
        let lp = inst.build_lp2();
        let sol = lp.solve(1e-12).unwrap();
        let agg = aggregate(&lp, &sol.x, 1e-12).unwrap();
        let plan = PricingPlan::full_information(&inst, &agg).unwrap();
        let pair = plan.pair(0, 0);
        assert!((pair.sale_probability - pair.x_star).abs() < 1e-12);
        assert_eq!(plan.p_offer, 0.25);
        assert!(plan.check_lp2_feasible(&lp).unwrap().feasible(1e-12));
        assert!((plan.witness_value(&lp).unwrap() - sol.objective).abs() < 1e-12);
    }

    #[test]
    fn zero_allocation_lifts_to_the_floor() {
        let inst = instance();
        let samples: Vec<f64> = (0..40).map(|k| [1.0, 2.0, 3.0][k % 3]).collect();
        let p = SampleParams::new(40, 0.1, 0.05, 0.1).unwrap();
        let model = EmpiricalModel::build(&samples, &p).unwrap();
        let xi_bar = model.xi_bar();
        let lp3 = inst.build_lp3(&[vec![model.clone()]]).unwrap();
        let agg = aggregate(&lp3, &vec![0.0; lp3.num_vars()], 1e-12).unwrap();
        let plan = PricingPlan::empirical(&inst, &[vec![model]], &agg, 0.1).unwrap();
        assert!((plan.pair(0, 0).z_star - xi_bar * 1.21).abs() < 1e-15);
        assert!((0.0..=1.0).contains(&plan.pair(0, 0).weight));
    }

    #[test]
    fn empirical_prices_sell_near_the_lifted_quantile() {
        let inst = instance();
        let truth = crate::dist::ValuationDistribution::from(inst.prior(0, 0).clone());
        let p = SampleParams::new(20_000, 0.1, 0.01, 0.1).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
        let model = EmpiricalModel::build(&truth.sample(&mut rng, p.m), &p).unwrap();
        assert!(model.coverage_event_holds(&truth, 0.1));
        let lp3 = inst.build_lp3(&[vec![model.clone()]]).unwrap();
        for x in [0.2, 0.5, 0.85] {
            // Aggregate of a single fractional threshold in the empirical LP.
            let agg = aggregate(&lp3, &[x, x, x], 1e-12).unwrap();
            let plan = PricingPlan::empirical(&inst, &[vec![model.clone()]], &agg, 0.1).unwrap();
            let pair = plan.pair(0, 0);
            let g2 = 1.21;
            assert!(pair.sale_probability <= g2 * pair.z_star + 1e-12, "{x}: {pair:?}");
            assert!(pair.sale_probability >= pair.z_star / g2 - 1e-12, "{x}: {pair:?}");
        }
    }
}
