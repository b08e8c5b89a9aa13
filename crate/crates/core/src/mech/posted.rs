//! Randomised posted prices for budgeted multi-item bidders.

use rand::Rng;

use super::{MechanismOutcome, Sale};
use crate::error::{invalid, Result};
use crate::lp::{MultiItemInstance, PricingPlan};

/// Sequential posted prices with fixed coins.
///
/// Bidders arrive in index order; each sees the unsold items it is offered and
/// buys in item order whenever its value and remaining budget cover the price
/// and its item limit is not reached.
pub fn posted_price_trace(
    inst: &MultiItemInstance<f64>,
    prices: &[Vec<f64>],
    offered: &[Vec<bool>],
    values: &[Vec<f64>],
) -> Result<MechanismOutcome> {
    let (ni, nj) = (inst.bidders(), inst.items());
    let shaped = |m: usize| m == ni;
    if !shaped(prices.len()) || !shaped(offered.len()) || !shaped(values.len()) {
        return Err(invalid("need one row per bidder"));
    }
    if prices.iter().chain(values).any(|r| r.len() != nj) || offered.iter().any(|r| r.len() != nj) {
        return Err(invalid("need one entry per item"));
    }
    let mut sold = vec![false; nj];
    let mut out = MechanismOutcome::empty(ni);
    for i in 0..ni {
        let mut budget = inst.budgets[i];
        let mut bought = 0;
        for j in 0..nj {
            let price = prices[i][j];
            if !offered[i][j] || sold[j] || bought >= inst.limits[i] {
                continue;
            }
            if values[i][j] >= price && budget >= price {
                sold[j] = true;
                bought += 1;
                budget -= price;
                out.payments[i] += price;
                out.revenue += price;
                out.welfare += values[i][j];
                out.sales.push(Sale { bidder: i, item: j, price });
            }
        }
        if bought > 0 {
            out.winners.push(i);
        }
    }
    Ok(out)
}

/// Draws each pair's price (`price` with probability `weight`, else `price + 1`)
/// and whether it is offered (probability `p_offer`), then runs the trace.
///
/// Coins are drawn pair by pair in (bidder, item) order, price coin first.
pub fn posted_price_mechanism<R: Rng + ?Sized>(
    inst: &MultiItemInstance<f64>,
    plan: &PricingPlan,
    values: &[Vec<f64>],
    rng: &mut R,
) -> Result<MechanismOutcome> {
    let (ni, nj) = (inst.bidders(), inst.items());
    let mut prices = vec![vec![0.0; nj]; ni];
    let mut offered = vec![vec![false; nj]; ni];
    for i in 0..ni {
        for j in 0..nj {
            let pair = plan.pair(i, j);
            prices[i][j] = if rng.gen::<f64>() < pair.weight { pair.price } else { pair.price + 1.0 };
            offered[i][j] = rng.gen::<f64>() < plan.p_offer;
        }
    }
    posted_price_trace(inst, &prices, &offered, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;

    fn inst(budget: f64, limit: usize, items: usize) -> MultiItemInstance<f64> {
        let d = DiscreteDist::new(vec![1.0, 2.0, 3.0], vec![0.3, 0.4, 0.3]).unwrap();
        MultiItemInstance::new(vec![vec![d; items]], vec![budget], vec![limit]).unwrap()
    }

    #[test]
    fn single_step() {
        let o = posted_price_trace(&inst(10.0, 1, 1), &[vec![2.0]], &[vec![true]], &[vec![3.0]]).unwrap();
        assert_eq!(o.revenue, 2.0);
        assert_eq!(o.sales, vec![Sale { bidder: 0, item: 0, price: 2.0 }]);
        let o = posted_price_trace(&inst(10.0, 1, 1), &[vec![2.0]], &[vec![false]], &[vec![3.0]]).unwrap();
        assert_eq!(o.revenue, 0.0);
    }

    #[test]
    fn budget_and_limit_bind() {
        let two = inst(3.0, 2, 2);
        let o = posted_price_trace(&two, &[vec![2.0, 2.0]], &[vec![true, true]], &[vec![3.0, 3.0]]).unwrap();
        assert_eq!(o.revenue, 2.0);
        let capped = inst(10.0, 1, 2);
        let o = posted_price_trace(&capped, &[vec![2.0, 1.0]], &[vec![true, true]], &[vec![3.0, 3.0]]).unwrap();
        assert_eq!(o.sales.len(), 1);
        assert_eq!(o.sales[0].item, 0);
    }
}
