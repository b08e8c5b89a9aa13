//! Myerson's auction and the budgeted coin-flip between a reserve-weighted
//! allocation and Myerson on budget-capped values.

use super::{Environment, MechanismOutcome};
use crate::dist::{DistKind, ValuationDistribution};
use crate::empirical::EmpiricalModel;
use crate::error::{invalid, Result};
use crate::numeric::bisect;

type Dist = ValuationDistribution<f64>;

/// What Myerson-style mechanisms need from a bidder's prior.
pub trait VirtualPrior {
    /// Virtual value of a report; `None` if the report can never be served.
    fn virtual_value(&self, v: f64) -> Option<f64>;
    /// Least report whose virtual value reaches `t` (exceeds it when `strict`).
    fn threshold(&self, t: f64, strict: bool) -> Option<f64>;
    fn reserve(&self) -> f64;
}

impl VirtualPrior for Dist {
    /// Discrete priors read `v` as the largest support point at most `v`.
    fn virtual_value(&self, v: f64) -> Option<f64> {
        let s = match self.kind() {
            DistKind::Discrete(dd) => dd.support().iter().rev().find(|&&s| s <= v).copied()?,
            _ => v,
        };
        self.virtual_valuation(s).ok()
    }

    fn threshold(&self, t: f64, strict: bool) -> Option<f64> {
        self.virtual_threshold(t, strict)
    }

    fn reserve(&self) -> f64 {
        self.reserve_price().unwrap_or(0.0)
    }
}

impl VirtualPrior for EmpiricalModel<f64> {
    fn virtual_value(&self, v: f64) -> Option<f64> {
        Some(self.virtual_of_value(v))
    }

    /// Bisects to `1e-10` on `[0, point-mass value]`, where `φ̄` is nondecreasing.
    fn threshold(&self, t: f64, strict: bool) -> Option<f64> {
        let reaches = |v: f64| {
            let phi = self.virtual_of_value(v);
            if strict {
                phi > t
            } else {
                phi >= t
            }
        };
        let hi = self.point_mass_value();
        if !reaches(hi) {
            return None;
        }
        Some(if reaches(0.0) { 0.0 } else { bisect(0.0, hi, 1e-10, reaches) })
    }

    fn reserve(&self) -> f64 {
        self.empirical_reserve()
    }
}

/// Serves the feasible set maximising total nonnegative virtual value; each
/// winner pays the least value that would still have won.
pub fn myerson<P: VirtualPrior>(env: &Environment, priors: &[P], values: &[f64]) -> Result<MechanismOutcome> {
    if priors.len() != env.bidders || values.len() != env.bidders {
        return Err(invalid("need one prior and one value per bidder"));
    }
    let dists = priors;
    let phis: Vec<f64> = dists
        .iter()
        .zip(values)
        .map(|(d, &v)| d.virtual_value(v).unwrap_or(f64::NEG_INFINITY))
        .collect();
    let weights: Vec<f64> = phis.iter().map(|&p| p.max(0.0)).collect();
    let (winners, best) = env.best_set(&weights);
    let mut payments = vec![0.0; values.len()];
    for &i in &winners {
        let critical = (env.best_without(&weights, i) - (best - weights[i])).max(0.0);
        let mut probe = weights.clone();
        probe[i] = critical;
        let wins_at_critical = critical > 0.0 && env.best_set(&probe).0.contains(&i);
        payments[i] = dists[i]
            .threshold(critical, !wins_at_critical)
            .map_or(values[i], |t| t.min(values[i]));
    }
    Ok(MechanismOutcome::from_winners(winners, payments, values))
}

pub fn myerson_single_item(dists: &[Dist], values: &[f64]) -> Result<MechanismOutcome> {
    myerson(&Environment::single_item(dists.len()), dists, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoMechChoice {
    /// Serve the set maximising total reserve price, for free.
    ReserveWeighted,
    /// Myerson on values capped at budgets.
    CappedMyerson,
}

/// One draw of the coin-flip mechanism. Welfare uses the uncapped values.
pub fn two_mech_budget<P: VirtualPrior>(
    env: &Environment,
    dists: &[P],
    values: &[f64],
    budgets: &[f64],
    choice: TwoMechChoice,
) -> Result<MechanismOutcome> {
    if budgets.len() != values.len() {
        return Err(invalid("need one budget per bidder"));
    }
    match choice {
        TwoMechChoice::ReserveWeighted => {
            let reserves: Vec<f64> = dists.iter().map(VirtualPrior::reserve).collect();
            let (winners, _) = env.best_set(&reserves);
            Ok(MechanismOutcome::from_winners(winners, vec![0.0; values.len()], values))
        }
        TwoMechChoice::CappedMyerson => {
            let capped: Vec<f64> = values.iter().zip(budgets).map(|(&v, &b)| v.min(b)).collect();
            let inner = myerson(env, dists, &capped)?;
            Ok(MechanismOutcome::from_winners(inner.winners, inner.payments, values))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;

    fn fhalf() -> Dist {
        Dist::falpha(0.5, 1.0).unwrap()
    }

    #[test]
    fn symmetric_and_asymmetric_thresholds() {
        let o = myerson_single_item(&[fhalf(), fhalf()], &[3.0, 2.0]).unwrap();
        assert_eq!(o.winners, vec![0]);
        assert!((o.revenue - 2.0).abs() < 1e-9);
        let o = myerson_single_item(&[fhalf(), Dist::exponential(1.0).unwrap()], &[1.5, 1.2]).unwrap();
        assert_eq!(o.winners, vec![0]);
        assert!((o.payments[0] - 1.4).abs() < 1e-9);
    }

    #[test]
    fn below_reserve_sells_nothing() {
        let o = myerson_single_item(&[fhalf(), fhalf()], &[0.5, 0.9]).unwrap();
        assert!(o.winners.is_empty());
        assert_eq!(o.revenue, 0.0);
    }

    #[test]
    fn lone_bidder_pays_the_reserve() {
        let o = myerson_single_item(&[fhalf()], &[3.0]).unwrap();
        assert!((o.revenue - 1.0).abs() < 1e-9);
    }

    #[test]
    fn discrete_ties_favour_the_lower_index() {
        let d: Dist = DiscreteDist::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap().into();
        let o = myerson_single_item(&[d.clone(), d.clone()], &[2.0, 2.0]).unwrap();
        assert_eq!(o.winners, vec![0]);
        assert_eq!(o.revenue, 2.0);
        let o = myerson_single_item(&[d.clone(), d], &[1.0, 2.0]).unwrap();
        assert_eq!((o.winners.clone(), o.revenue), (vec![1], 2.0));
    }

    #[test]
    fn coin_flip_branches() {
        let env = Environment::single_item(2);
        let d = [fhalf(), fhalf()];
        let o = two_mech_budget(&env, &d, &[3.0, 2.0], &[2.5, 10.0], TwoMechChoice::ReserveWeighted).unwrap();
        assert_eq!((o.winners.clone(), o.revenue, o.welfare), (vec![0], 0.0, 3.0));
        let o = two_mech_budget(&env, &d, &[3.0, 2.0], &[2.5, 10.0], TwoMechChoice::CappedMyerson).unwrap();
        assert_eq!(o.winners, vec![0]);
        assert!((o.revenue - 2.0).abs() < 1e-9);
        assert!(o.payments[0] <= 2.5);
        let o = two_mech_budget(&env, &d, &[3.0, 2.0], &[0.5, 0.5], TwoMechChoice::CappedMyerson).unwrap();
        assert!(o.winners.is_empty());
    }
}
