//! VCG with Clarke payments, with duplicates and with lazy reserves.

use super::{Environment, MechanismOutcome};
use crate::empirical::EmpiricalModel;
use crate::error::{invalid, Result};

fn check_len(env: &Environment, values: &[f64]) -> Result<()> {
    if values.len() != env.bidders {
        return Err(invalid(format!("expected {} values, got {}", env.bidders, values.len())));
    }
    Ok(())
}

/// Efficient feasible set; winner `i` pays `OPT_{-i} - (OPT - v_i)`.
pub fn vcg(env: &Environment, values: &[f64]) -> Result<MechanismOutcome> {
    check_len(env, values)?;
    let (winners, best) = env.best_set(values);
    let mut payments = vec![0.0; values.len()];
    for &i in &winners {
        payments[i] = (env.best_without(values, i) - (best - values[i])).max(0.0);
    }
    Ok(MechanismOutcome::from_winners(winners, payments, values))
}

/// VCG over bidders and their copies; copy of bidder `i` is bidder `n + i`.
pub fn vcg_with_duplicates(env: &Environment, values: &[f64], duplicates: &[f64]) -> Result<MechanismOutcome> {
    check_len(env, values)?;
    check_len(env, duplicates)?;
    let all: Vec<f64> = values.iter().chain(duplicates).copied().collect();
    vcg(&env.with_duplicates(), &all)
}

/// VCG, then winners below their reserve are dropped and survivors pay
/// the larger of their reserve and their VCG payment.
pub fn vcg_lazy(env: &Environment, values: &[f64], reserves: &[f64]) -> Result<MechanismOutcome> {
    check_len(env, reserves)?;
    let base = vcg(env, values)?;
    let mut payments = vec![0.0; values.len()];
    let winners: Vec<usize> = base.winners.into_iter().filter(|&i| values[i] >= reserves[i]).collect();
    for &i in &winners {
        payments[i] = base.payments[i].max(reserves[i]);
    }
    Ok(MechanismOutcome::from_winners(winners, payments, values))
}

/// [`vcg_lazy`] with each bidder's reserve read from its sample model.
pub fn empirical_vcg_lazy(
    env: &Environment,
    values: &[f64],
    models: &[&EmpiricalModel<f64>],
) -> Result<MechanismOutcome> {
    let reserves: Vec<f64> = models.iter().map(|m| m.empirical_reserve()).collect();
    vcg_lazy(env, values, &reserves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::SampleParams;

    #[test]
    fn second_price_and_pivots() {
        let single = Environment::single_item(2);
        let o = vcg(&single, &[3.0, 2.0]).unwrap();
        assert_eq!(o.winners, vec![0]);
        assert_eq!(o.payments, vec![2.0, 0.0]);
        let k2 = Environment::k_uniform(3, 2);
        let o = vcg(&k2, &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(o.winners, vec![0, 1]);
        assert_eq!(o.payments, vec![1.0, 1.0, 0.0]);
        assert_eq!(o.revenue, 2.0);
        let o = vcg(&k2, &[0.0, 0.0, 0.0]).unwrap();
        assert!(o.winners.is_empty());
        assert_eq!(o.revenue, 0.0);
    }

    #[test]
    fn duplicates() {
        let one = Environment::single_item(1);
        let o = vcg_with_duplicates(&one, &[3.0], &[2.0]).unwrap();
        assert_eq!((o.winners.clone(), o.revenue), (vec![0], 2.0));
        let o = vcg_with_duplicates(&one, &[2.0], &[3.0]).unwrap();
        assert_eq!(o.winners, vec![1]);
        let two = Environment::single_item(2);
        let o = vcg_with_duplicates(&two, &[3.0, 1.0], &[2.0, 4.0]).unwrap();
        assert_eq!(o.winners, vec![3]);
        assert_eq!(o.revenue, 3.0);
    }

    #[test]
    fn lazy_reserves() {
        let env = Environment::single_item(2);
        let o = vcg_lazy(&env, &[3.0, 2.0], &[1.0, 1.0]).unwrap();
        assert_eq!((o.winners.clone(), o.revenue), (vec![0], 2.0));
        let o = vcg_lazy(&env, &[0.5, 0.4], &[1.0, 1.0]).unwrap();
        assert!(o.winners.is_empty());
        let o = vcg_lazy(&env, &[3.0, 0.5], &[1.0, 1.0]).unwrap();
        assert_eq!((o.winners.clone(), o.revenue), (vec![0], 1.0));
    }

    #[test]
    fn empirical_reserves_delegate() {
        let p = SampleParams::new(1, 0.1, 0.001, 0.1).unwrap();
        let m = EmpiricalModel::build(&[1.0], &p).unwrap();
        let env = Environment::single_item(2);
        let o = empirical_vcg_lazy(&env, &[3.0, 2.0], &[&m, &m]).unwrap();
        assert_eq!(o, vcg_lazy(&env, &[3.0, 2.0], &[m.empirical_reserve(); 2]).unwrap());
    }
}
