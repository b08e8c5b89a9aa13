//! Allocation LPs for bidders with budgets and per-bidder item limits.
//!
//! One variable per (bidder, item, support value). Rows: expected items per
//! bidder `<= n_i`, expected payment per bidder `<= B_i`, expected sales per
//! item `<= 1`. The objective is expected virtual surplus.

use super::simplex::{LpProblem, LpRow, LpTag, PairVar, RowFamily};
use crate::dist::DiscreteDist;
use crate::empirical::EmpiricalModel;
use crate::error::{invalid, Error, Result};
use crate::scalar::{Real, Scalar};

/// Bidders `I`, items `J`, a discrete prior per pair, budgets and item limits.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiItemInstance<T> {
    /// `priors[i][j]` is bidder `i`'s prior for item `j`.
    pub priors: Vec<Vec<DiscreteDist<T>>>,
    pub budgets: Vec<T>,
    pub limits: Vec<usize>,
}

impl<T: Scalar> MultiItemInstance<T> {
    pub fn new(priors: Vec<Vec<DiscreteDist<T>>>, budgets: Vec<T>, limits: Vec<usize>) -> Result<Self> {
        let bidders = priors.len();
        if bidders == 0 || budgets.len() != bidders || limits.len() != bidders {
            return Err(invalid("need one prior row, budget and limit per bidder"));
        }
        let items = priors[0].len();
        if items == 0 || priors.iter().any(|row| row.len() != items) {
            return Err(invalid("every bidder needs one prior per item"));
        }
        if budgets.iter().any(|&b| b < T::zero()) {
            return Err(invalid("budgets must be nonnegative"));
        }
        Ok(Self {
            priors,
            budgets,
            limits,
        })
    }

    /// Folds each prior's mass above its bidder's budget onto the budget.
    pub fn truncated(priors: Vec<Vec<DiscreteDist<T>>>, budgets: Vec<T>, limits: Vec<usize>) -> Result<Self> {
        let inst = Self::new(priors, budgets, limits)?;
        let priors = inst
            .priors
            .iter()
            .zip(&inst.budgets)
            .map(|(row, &b)| row.iter().map(|d| d.truncate_at(b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { priors, ..inst })
    }

    pub fn bidders(&self) -> usize {
        self.priors.len()
    }

    pub fn items(&self) -> usize {
        self.priors[0].len()
    }

    pub fn prior(&self, i: usize, j: usize) -> &DiscreteDist<T> {
        &self.priors[i][j]
    }

    /// Index range of the variables of pair `(i, j)` in every LP built from this instance.
    pub fn pair_range(&self, i: usize, j: usize) -> std::ops::Range<usize> {
        let mut start = 0;
        for (bi, row) in self.priors.iter().enumerate() {
            for (ij, d) in row.iter().enumerate() {
                if (bi, ij) == (i, j) {
                    return start..start + d.len();
                }
                start += d.len();
            }
        }
        start..start
    }

    fn assemble(&self, tag: LpTag, vars: Vec<PairVar<T>>) -> LpProblem<T> {
        let n = vars.len();
        let (nb, ni) = (self.bidders(), self.items());
        let mut rows = Vec::with_capacity(2 * nb + ni);
        let row_of = |family: RowFamily, rhs: T, pick: &dyn Fn(&PairVar<T>) -> T| LpRow {
            family,
            coeffs: vars.iter().map(pick).collect(),
            rhs,
        };
        for i in 0..nb {
            rows.push(row_of(RowFamily::BidderCount(i), T::count(self.limits[i]), &|v| {
                if v.bidder == i { v.mass } else { T::zero() }
            }));
        }
        for i in 0..nb {
            rows.push(row_of(RowFamily::BidderBudget(i), self.budgets[i], &|v| {
                if v.bidder == i { v.mass * v.virtual_value } else { T::zero() }
            }));
        }
        for j in 0..ni {
            rows.push(row_of(RowFamily::ItemSupply(j), T::one(), &|v| {
                if v.item == j { v.mass } else { T::zero() }
            }));
        }
        LpProblem {
            tag,
            objective: vars.iter().map(|v| v.mass * v.virtual_value).collect(),
            rows,
            upper: vec![T::one(); n],
            vars,
        }
    }

    /// The allocation LP over the true priors.
    pub fn build_lp2(&self) -> LpProblem<T> {
        let mut vars = Vec::new();
        for (i, row) in self.priors.iter().enumerate() {
            for (j, d) in row.iter().enumerate() {
                for (k, &value) in d.support().iter().enumerate() {
                    vars.push(PairVar {
                        bidder: i,
                        item: j,
                        value,
                        mass: d.pmf()[k],
                        virtual_value: d.virtual_value_at(k),
                    });
                }
            }
        }
        self.assemble(LpTag::True, vars)
    }
}

/// Empirical masses and virtual values on the support of a true prior.
///
/// `Q̄(r)` is the empirical quantile of `r` (zero above the point mass),
/// `f̄(r) = Q̄(r) - Q̄(r⁺)` for the next support value `r⁺`, and `φ̄(r)` is the
/// slope of the empirical envelope between those two quantiles, so that
/// `Σ_{r >= b} f̄ φ̄ = CR̄(Q̄(b))` holds exactly.
pub fn empirical_ladder<T: Real>(support: &[T], model: &EmpiricalModel<T>) -> Vec<(T, T, T)> {
    let quantile = |r: T| {
        if r > model.point_mass_value() {
            T::zero()
        } else {
            model.quantile_of_value(r)
        }
    };
    let qs: Vec<T> = support.iter().map(|&r| quantile(r)).collect();
    (0..support.len())
        .map(|k| {
            let q_hi = qs[k];
            let q_lo = qs.get(k + 1).copied().unwrap_or_else(T::zero);
            let mass = (q_hi - q_lo).max(T::zero());
            let phi = if mass > T::zero() {
                (model.envelope_revenue(q_hi) - model.envelope_revenue(q_lo)) / mass
            } else {
                T::zero()
            };
            (support[k], mass, phi)
        })
        .collect()
}

impl<T: Real> MultiItemInstance<T> {
    /// The allocation LP over empirical priors, one model per pair, on the true supports.
    pub fn build_lp3(&self, models: &[Vec<EmpiricalModel<T>>]) -> Result<LpProblem<T>> {
        if models.len() != self.bidders() || models.iter().any(|row| row.len() != self.items()) {
            return Err(invalid("need one empirical model per pair"));
        }
        let mut vars = Vec::new();
        for (i, row) in self.priors.iter().enumerate() {
            for (j, d) in row.iter().enumerate() {
                if d.is_empty() {
                    return Err(Error::EmptySupport);
                }
                for (value, mass, phi) in empirical_ladder(d.support(), &models[i][j]) {
                    vars.push(PairVar {
                        bidder: i,
                        item: j,
                        value,
                        mass,
                        virtual_value: phi,
                    });
                }
            }
        }
        Ok(self.assemble(LpTag::Empirical, vars))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::SampleParams;

    fn two_point() -> DiscreteDist<f64> {
        DiscreteDist::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn single_pair_lp_has_the_expected_rows() {
        let inst = MultiItemInstance::new(vec![vec![two_point()]], vec![10.0], vec![1]).unwrap();
        let lp = inst.build_lp2();
        assert_eq!(lp.objective, vec![0.0, 1.0]);
        assert_eq!(lp.rows.len(), 3);
        assert_eq!(lp.rows[0].coeffs, vec![0.5, 0.5]);
        assert_eq!(lp.rows[1].rhs, 10.0);
        let s = lp.solve(1e-12).unwrap();
        assert_eq!(s.objective, 1.0);
        assert_eq!(s.x[1], 1.0);
        let tight = MultiItemInstance::new(vec![vec![two_point()]], vec![0.4], vec![1]).unwrap();
        assert!((tight.build_lp2().solve(1e-12).unwrap().objective - 0.4).abs() < 1e-12);
    }

    #[test]
    fn zero_item_limit_forces_zero() {
        let inst = MultiItemInstance::new(vec![vec![two_point()]], vec![10.0], vec![0]).unwrap();
        let s = inst.build_lp2().solve(1e-12).unwrap();
        assert_eq!(s.objective, 0.0);
        assert!(s.x.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn item_row_couples_bidders() {
        let inst = MultiItemInstance::new(
            vec![vec![two_point()], vec![two_point()]],
            vec![10.0, 10.0],
            vec![1, 1],
        )
        .unwrap();
        let lp = inst.build_lp2();
        let supply = lp
            .rows
            .iter()
            .find(|r| r.family == RowFamily::ItemSupply(0))
            .unwrap();
        assert_eq!(supply.coeffs, vec![0.5, 0.5, 0.5, 0.5]);
        assert_eq!(inst.pair_range(1, 0), 2..4);
    }

    #[test]
    fn empirical_ladder_reproduces_the_envelope() {
        let p = SampleParams::new(6, 0.2, 0.2, 0.1).unwrap();
        let em = EmpiricalModel::build(&[1.0, 2.0, 2.0, 3.0, 3.0, 4.0], &p).unwrap();
        let ladder = empirical_ladder(&[1.0, 2.0, 3.0, 4.0], &em);
        let mut tail = 0.0;
        for k in (0..ladder.len()).rev() {
            tail += ladder[k].1 * ladder[k].2;
            let q = ladder[k..].iter().map(|x| x.1).sum::<f64>();
            assert!((tail - em.envelope_revenue(q)).abs() < 1e-12);
        }
    }

    #[test]
    fn tied_values_take_their_own_chord() {
        let samples: Vec<f64> = (0..60).map(|k| [1.0, 2.0, 2.0, 3.0, 4.0][k % 5]).collect();
        let em = EmpiricalModel::build(&samples, &SampleParams::new(60, 0.1, 0.05, 0.1).unwrap()).unwrap();
        for (r, mass, phi) in empirical_ladder(&[1.0, 2.0, 3.0, 4.0], &em) {
            if mass > 0.0 {
                assert!((em.virtual_of_value(r) - phi).abs() < 1e-12, "value {r}");
            }
        }
    }
}
