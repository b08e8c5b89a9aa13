//! Lottery systems for bidders with private budgets.
//!
//! `L(p, p')` posts price `p` when `p >= p'/3`; otherwise the bidder picks
//! `a` in `[2p/p', 2/3]` and wins with probability `1/3 + a` at price `a p'/2`.

use rand::Rng;

use super::{Environment, MechanismOutcome};
use crate::error::{invalid, Result};

const A_MAX: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LotteryMode {
    Posted { price: f64 },
    Menu { a_min: f64, a_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LotteryOffer {
    pub p: f64,
    pub pprime: f64,
    pub mode: LotteryMode,
}

pub fn lottery_offer(p: f64, pprime: f64) -> LotteryOffer {
    let mode = if p >= pprime / 3.0 {
        LotteryMode::Posted { price: p }
    } else {
        LotteryMode::Menu {
            a_min: 2.0 * p / pprime,
            a_max: A_MAX,
        }
    };
    LotteryOffer { p, pprime, mode }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Purchase {
    pub bought: bool,
    pub price: f64,
    /// Menu parameter chosen, if the offer was a menu and some option was affordable.
    pub a: Option<f64>,
}

impl Purchase {
    const NONE: Self = Self {
        bought: false,
        price: 0.0,
        a: None,
    };
}

/// A risk-neutral bidder with value `v` and budget `budget`.
///
/// Menus: the bidder maximises `(1/3 + a)(v - a p'/2)` over affordable `a`,
/// whose unconstrained optimum is `a = v/p' - 1/6`, and enters the lottery
/// only if that expected utility is nonnegative.
pub fn lottery_bidder_choice<R: Rng + ?Sized>(offer: &LotteryOffer, v: f64, budget: f64, rng: &mut R) -> Purchase {
    match offer.mode {
        LotteryMode::Posted { price } => {
            if v >= price && budget >= price {
                Purchase {
                    bought: true,
                    price,
                    a: None,
                }
            } else {
                Purchase::NONE
            }
        }
        LotteryMode::Menu { a_min, a_max } => {
            let hi = a_max.min(2.0 * budget / offer.pprime);
            if hi < a_min {
                return Purchase::NONE;
            }
            let a = (v / offer.pprime - 1.0 / 6.0).clamp(a_min, hi);
            let price = a * offer.pprime / 2.0;
            if (1.0 / 3.0 + a) * (v - price) < 0.0 {
                return Purchase::NONE;
            }
            let win = rng.gen::<f64>() < 1.0 / 3.0 + a;
            Purchase {
                bought: win,
                price: if win { price } else { 0.0 },
                a: Some(a),
            }
        }
    }
}

/// The set maximising `Σ min(v_i, B_i)` and each bidder's inclusion threshold
/// `T_i = min{v' : i selected when its value and budget are both v'}`.
pub fn selection_and_thresholds(env: &Environment, values: &[f64], budgets: &[f64]) -> Result<(Vec<usize>, Vec<f64>)> {
    if values.len() != env.bidders || budgets.len() != env.bidders {
        return Err(invalid("need one value and one budget per bidder"));
    }
    const TOL: f64 = 1e-9;
    let weights: Vec<f64> = values.iter().zip(budgets).map(|(&v, &b)| v.min(b)).collect();
    let (selected, _) = env.best_set(&weights);
    let top = weights.iter().copied().fold(0.0, f64::max) + 1.0;
    let thresholds = (0..env.bidders)
        .map(|i| {
            let mut w = weights.clone();
            let mut included = |x: f64| {
                w[i] = x;
                env.best_set(&w).0.contains(&i)
            };
            if !included(top) {
                return f64::INFINITY;
            }
            let (mut lo, mut hi) = (0.0, top);
            while hi - lo > TOL {
                let mid = 0.5 * (lo + hi);
                if included(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if hi <= TOL {
                0.0
            } else {
                hi
            }
        })
        .collect();
    Ok((selected, thresholds))
}

/// Offers bidder `i` the lottery `L(T_i, reserve_i)`; purchases are independent.
pub fn lottery_mechanism<R: Rng + ?Sized>(
    env: &Environment,
    values: &[f64],
    budgets: &[f64],
    reserves: &[f64],
    rng: &mut R,
) -> Result<MechanismOutcome> {
    if reserves.len() != env.bidders {
        return Err(invalid("need one reserve per bidder"));
    }
    let (_, thresholds) = selection_and_thresholds(env, values, budgets)?;
    let mut winners = Vec::new();
    let mut payments = vec![0.0; env.bidders];
    for i in 0..env.bidders {
        let offer = lottery_offer(thresholds[i], reserves[i]);
        let purchase = lottery_bidder_choice(&offer, values[i], budgets[i], rng);
        if purchase.bought {
            winners.push(i);
            payments[i] = purchase.price;
        }
    }
    Ok(MechanismOutcome::from_winners(winners, payments, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn offer_modes() {
        assert_eq!(lottery_offer(1.0, 2.0).mode, LotteryMode::Posted { price: 1.0 });
        match lottery_offer(0.1, 2.0).mode {
            LotteryMode::Menu { a_min, a_max } => {
                assert!((a_min - 0.1).abs() < 1e-15);
                assert_eq!(a_max, 2.0 / 3.0);
            }
            m => panic!("unexpected {m:?}"),
        }
        assert!(matches!(lottery_offer(0.0, 5.0).mode, LotteryMode::Menu { a_min, .. } if a_min == 0.0));
    }

    #[test]
    fn choices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = lottery_bidder_choice(&lottery_offer(0.1, 2.0), 3.0, f64::INFINITY, &mut rng);
        assert_eq!(p.a, Some(2.0 / 3.0));
        assert!(p.bought);
        assert!((p.price - 2.0 / 3.0).abs() < 1e-15);
        assert!(!lottery_bidder_choice(&lottery_offer(1.0, 2.0), 0.5, 10.0, &mut rng).bought);
        let tight = lottery_bidder_choice(&lottery_offer(0.1, 2.0), 3.0, 0.1, &mut rng);
        assert!((tight.a.unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn thresholds() {
        let env = Environment::single_item(2);
        let (sel, t) = selection_and_thresholds(&env, &[5.0, 2.0], &[5.0, 9.0]).unwrap();
        assert_eq!(sel, vec![0]);
        assert!((t[0] - 2.0).abs() < 1e-8);
        let (_, t) = selection_and_thresholds(&env, &[5.0, 9.0], &[5.0, 2.0]).unwrap();
        assert!((t[0] - 2.0).abs() < 1e-8);
        let all = Environment::k_uniform(2, 2);
        let (sel, t) = selection_and_thresholds(&all, &[5.0, 2.0], &[5.0, 9.0]).unwrap();
        assert_eq!(sel, vec![0, 1]);
        assert_eq!(t, vec![0.0, 0.0]);
    }

    #[test]
    fn mechanism_compositions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let env = Environment::single_item(1);
        let o = lottery_mechanism(&env, &[3.0], &[10.0], &[2.0], &mut rng).unwrap();
        // T = 0 gives a menu; the bidder picks a = 2/3 and always wins at 2/3.
        assert_eq!(o.winners, vec![0]);
        assert!((o.revenue - 2.0 / 3.0).abs() < 1e-12);
        let env2 = Environment::single_item(2);
        let o = lottery_mechanism(&env2, &[0.5, 0.4], &[10.0, 10.0], &[0.1, 0.1], &mut rng).unwrap();
        assert!(o.winners.iter().all(|&i| o.payments[i] <= [0.5, 0.4][i]));
    }
}
