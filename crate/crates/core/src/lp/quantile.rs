//! Quantile aggregates of allocation-LP solutions and their threshold form.
//!
//! For a pair with support `r_1 < … < r_K`, a threshold vector is 1 above some
//! index `L'`, fractional at `L'` and 0 below. Its aggregate `x* = Σ f x` and
//! contribution `Σ f φ x = CR(x*)` are tied by the revenue curve.

use std::ops::Range;

use super::simplex::{LpProblem, PairVar};
use crate::dist::DiscreteDist;
use crate::empirical::EmpiricalModel;
use crate::error::{invalid, Result};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct PairAggregate<T> {
    pub bidder: usize,
    pub item: usize,
    pub range: Range<usize>,
    /// `Σ f x` of the solution as given.
    pub raw: T,
    /// `Σ f φ x` of the solution as given.
    pub contribution: T,
    /// Aggregate of the threshold representative.
    pub x_star: T,
    /// Index within the pair of the fractional entry `L'`.
    pub threshold: usize,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSolution<T> {
    pub pairs: Vec<PairAggregate<T>>,
    /// Threshold-structured point with the same per-bidder objective.
    pub representative: Vec<T>,
    /// `Σ_ij CR_ij(x*_ij)`.
    pub objective: T,
}

impl<T: Scalar> QuantileSolution<T> {
    pub fn x_star(&self, bidder: usize, item: usize) -> T {
        self.pairs
            .iter()
            .find(|p| p.bidder == bidder && p.item == item)
            .map_or_else(T::zero, |p| p.x_star)
    }
}

/// Contiguous runs of variables sharing a (bidder, item) pair.
pub fn pair_ranges<T>(vars: &[PairVar<T>]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=vars.len() {
        if k == vars.len() || (vars[k].bidder, vars[k].item) != (vars[start].bidder, vars[start].item) {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// `CR(q)` of a pair ladder: the contribution of the threshold vector with aggregate `q`.
pub fn ladder_revenue<T: Scalar>(vars: &[PairVar<T>], q: T) -> T {
    let (mut acc_q, mut acc_r) = (T::zero(), T::zero());
    for v in vars.iter().rev() {
        if acc_q + v.mass >= q {
            return acc_r + (q - acc_q).sup(T::zero()) * v.virtual_value;
        }
        acc_q = acc_q + v.mass;
        acc_r = acc_r + v.mass * v.virtual_value;
    }
    acc_r
}

/// Threshold vector filled from the top until its contribution reaches `target`.
fn fill_from_top<T: Scalar>(vars: &[PairVar<T>], target: T) -> Vec<T> {
    let mut x = vec![T::zero(); vars.len()];
    if target <= T::zero() {
        return x;
    }
    let mut acc = T::zero();
    for k in (0..vars.len()).rev() {
        let step = vars[k].mass * vars[k].virtual_value;
        if step <= T::zero() {
            break;
        }
        if acc + step >= target {
            x[k] = ((target - acc) / step).inf(T::one());
            return x;
        }
        x[k] = T::one();
        acc = acc + step;
    }
    x
}

/// Aggregates an LP point into per-pair quantiles and a threshold representative.
///
/// Each pair's representative is filled from the top to the pair's contribution,
/// then extended over zero-virtual-value atoms towards the raw aggregate. A
/// bidder whose pairs have negative contributions has them zeroed and its
/// positive ones scaled so the bidder's total is unchanged.
pub fn aggregate<T: Scalar>(lp: &LpProblem<T>, x: &[T], tol: T) -> Result<QuantileSolution<T>> {
    if lp.vars.len() != x.len() {
        return Err(invalid("point does not match the LP's variables"));
    }
    let ranges = pair_ranges(&lp.vars);
    let sum = |r: &Range<usize>, f: &dyn Fn(&PairVar<T>) -> T| {
        r.clone().fold(T::zero(), |acc, k| acc + f(&lp.vars[k]) * x[k])
    };
    let raw: Vec<T> = ranges.iter().map(|r| sum(r, &|v| v.mass)).collect();
    let contrib: Vec<T> = ranges
        .iter()
        .map(|r| sum(r, &|v| v.mass * v.virtual_value))
        .collect();

    let bidders = lp.vars.iter().map(|v| v.bidder + 1).max().unwrap_or(0);
    let mut targets = contrib.clone();
    for b in 0..bidders {
        let idx: Vec<usize> = (0..ranges.len())
            .filter(|&p| lp.vars[ranges[p].start].bidder == b)
            .collect();
        let pos = idx.iter().fold(T::zero(), |a, &p| a + contrib[p].sup(T::zero()));
        let neg = idx.iter().fold(T::zero(), |a, &p| a + contrib[p].inf(T::zero()));
        if neg < T::zero() {
            let total = (pos + neg).sup(T::zero());
            for &p in &idx {
                targets[p] = if contrib[p] > T::zero() && pos > T::zero() {
                    contrib[p] * total / pos
                } else {
                    T::zero()
                };
            }
        }
    }

    let mut representative = vec![T::zero(); x.len()];
    let mut pairs = Vec::with_capacity(ranges.len());
    let mut objective = T::zero();
    for (p, range) in ranges.iter().enumerate() {
        let vars = &lp.vars[range.clone()];
        let mut xs = fill_from_top(vars, targets[p]);
        let mut agg = vars.iter().zip(&xs).fold(T::zero(), |a, (v, &xv)| a + v.mass * xv);
        for k in (0..vars.len()).rev() {
            if agg >= raw[p] - tol {
                break;
            }
            if xs[k] >= T::one() {
                continue;
            }
            if vars[k].virtual_value.magnitude() > tol {
                if xs[k] > T::zero() {
                    break;
                }
                continue;
            }
            let add = (vars[k].mass * (T::one() - xs[k])).inf(raw[p] - agg);
            if vars[k].mass > T::zero() {
                xs[k] = xs[k] + add / vars[k].mass;
                agg = agg + add;
            }
        }
        let threshold = xs.iter().position(|&v| v > T::zero()).unwrap_or(vars.len() - 1);
        let value = vars
            .iter()
            .zip(&xs)
            .fold(T::zero(), |a, (v, &xv)| a + v.mass * v.virtual_value * xv);
        objective = objective + value;
        representative[range.clone()].copy_from_slice(&xs);
        pairs.push(PairAggregate {
            bidder: vars[0].bidder,
            item: vars[0].item,
            range: range.clone(),
            raw: raw[p],
            contribution: contrib[p],
            x_star: agg,
            threshold,
            weight: xs[threshold],
        });
    }
    Ok(QuantileSolution {
        pairs,
        representative,
        objective,
    })
}

/// The quantile `q' <= q(reserve)` with `CR(q') = CR(q)`.
pub fn mirror_below_reserve<T: Scalar>(d: &DiscreteDist<T>, q: T) -> Result<T> {
    let reserve_q = d.sale_probabilities()[d.reserve_index()?];
    if q <= reserve_q {
        return Ok(q);
    }
    let target = d.revenue_curve(q);
    // Walk the increasing part of the curve from the origin.
    let mut knots: Vec<(T, T)> = vec![(T::zero(), T::zero())];
    for k in (0..d.len()).rev() {
        let qk = d.sale_probabilities()[k];
        if qk > reserve_q {
            break;
        }
        knots.push((qk, d.support()[k] * qk));
    }
    for w in knots.windows(2) {
        let ((q0, r0), (q1, r1)) = (w[0], w[1]);
        if r1 >= target {
            if r1 == r0 {
                return Ok(q0);
            }
            return Ok(q0 + (target - r0) * (q1 - q0) / (r1 - r0));
        }
    }
    Ok(reserve_q)
}

/// `v = w·r + (1 - w)(r + 1)` with `r = ⌊v⌋`; integral `v` gives `(v, 1)`.
pub fn decompose_value<T: Real>(v: T) -> (T, T) {
    let r = v.floor();
    (r, T::one() - (v - r))
}

/// Integer posted prices from the support minimum to one past the maximum,
/// with their sale probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceLadder<T> {
    pub prices: Vec<T>,
    pub sale_probabilities: Vec<T>,
}

impl<T: Real> PriceLadder<T> {
    pub fn new(d: &DiscreteDist<T>) -> Result<Self> {
        if d.support().iter().any(|v| v.fract() != T::zero()) {
            return Err(invalid("price ladders need an integer support"));
        }
        let lo = d.min_value().to_i64().unwrap_or(0);
        let hi = d.max_value().to_i64().unwrap_or(0) + 1;
        let prices: Vec<T> = (lo..=hi).map(|p| T::lit(p as f64)).collect();
        let sale_probabilities = prices.iter().map(|&p| d.sale_probability(p)).collect();
        Ok(Self {
            prices,
            sale_probabilities,
        })
    }

    /// The same prices with the model's empirical sale probabilities; prices
    /// above the point-mass value never sell.
    pub fn empirical(d: &DiscreteDist<T>, model: &EmpiricalModel<T>) -> Result<Self> {
        let mut ladder = Self::new(d)?;
        ladder.sale_probabilities = ladder
            .prices
            .iter()
            .map(|&p| {
                if p > model.point_mass_value() {
                    T::zero()
                } else {
                    model.quantile_of_value(p)
                }
            })
            .collect();
        Ok(ladder)
    }

    /// `(r, w)` such that posting `r` with probability `w` and `r + 1` otherwise
    /// sells with probability exactly `q`; a quantile on a step takes the higher price with `w = 1`.
    pub fn decompose_quantile(&self, q: T) -> (T, T) {
        let qs = &self.sale_probabilities;
        for k in 0..qs.len() - 1 {
            if qs[k + 1] < q {
                let w = ((q - qs[k + 1]) / (qs[k] - qs[k + 1])).min(T::one());
                return (self.prices[k], w);
            }
        }
        (self.prices[qs.len() - 1], T::one())
    }
}

/// `x(s) = 1` for `s > r`, `w` at `s = r`, `0` below.
pub fn threshold_vector<T: Scalar>(support: &[T], r: T, w: T) -> Vec<T> {
    support
        .iter()
        .map(|&s| {
            if s > r {
                T::one()
            } else if s == r {
                w
            } else {
                T::zero()
            }
        })
        .collect()
}
