//! Dense bounded-variable primal simplex for `max c·x` subject to
//! `A x <= b`, `0 <= x <= u`, with `b >= 0` so that `x = 0` is feasible.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpTag {
    /// Allocation LP over the true priors.
    True,
    /// Allocation LP over the empirical priors.
    Empirical,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFamily {
    /// Expected number of items a bidder receives.
    BidderCount(usize),
    /// Expected payment of a bidder.
    BidderBudget(usize),
    /// Expected number of times an item is sold.
    ItemSupply(usize),
    Generic(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow<T> {
    pub family: RowFamily,
    pub coeffs: Vec<T>,
    pub rhs: T,
}

/// A variable `x_ij(r)`: the probability that bidder `bidder` is allocated
/// item `item` when its value for it is `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairVar<T> {
    pub bidder: usize,
    pub item: usize,
    pub value: T,
    pub mass: T,
    pub virtual_value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem<T> {
    pub tag: LpTag,
    pub objective: Vec<T>,
    pub rows: Vec<LpRow<T>>,
    pub upper: Vec<T>,
    /// Per-variable metadata; empty for generic problems.
    pub vars: Vec<PairVar<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    pub iterations: usize,
}

/// Row and box slacks of a candidate point.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackReport<T> {
    pub rows: Vec<(RowFamily, T)>,
    /// `min(x_k, u_k - x_k)` per variable.
    pub boxes: Vec<T>,
}

impl<T: Scalar> SlackReport<T> {
    pub fn min_slack(&self) -> Option<T> {
        self.rows
            .iter()
            .map(|r| r.1)
            .chain(self.boxes.iter().copied())
            .fold(None, |acc, s| Some(acc.map_or(s, |a: T| a.inf(s))))
    }

    pub fn feasible(&self, tol: T) -> bool {
        self.min_slack().map_or(true, |s| s >= -tol)
    }
}

impl<T: Scalar> LpProblem<T> {
    /// Generic problem with unit or custom upper bounds.
    pub fn generic(objective: Vec<T>, rows: Vec<(Vec<T>, T)>, upper: Vec<T>) -> Result<Self> {
        let lp = Self {
            tag: LpTag::Generic,
            objective,
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(k, (coeffs, rhs))| LpRow {
                    family: RowFamily::Generic(k),
                    coeffs,
                    rhs,
                })
                .collect(),
            upper,
            vars: Vec::new(),
        };
        lp.check_shape()?;
        Ok(lp)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.num_vars();
        if self.upper.len() != n || (!self.vars.is_empty() && self.vars.len() != n) {
            return Err(invalid("bounds or metadata do not match the variable count"));
        }
        for row in &self.rows {
            if row.coeffs.len() != n {
                return Err(invalid("row length does not match the variable count"));
            }
            if row.rhs < T::zero() {
                return Err(invalid("right-hand sides must be nonnegative"));
            }
        }
        if self.upper.iter().any(|&u| u < T::zero()) {
            return Err(invalid("upper bounds must be nonnegative"));
        }
        Ok(())
    }

    pub fn value(&self, x: &[T]) -> T {
        self.objective
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (&c, &v)| acc + c * v)
    }

    pub fn slacks(&self, x: &[T]) -> SlackReport<T> {
        SlackReport {
            rows: self
                .rows
                .iter()
                .map(|row| {
                    let lhs = row
                        .coeffs
                        .iter()
                        .zip(x)
                        .fold(T::zero(), |acc, (&a, &v)| acc + a * v);
                    (row.family, row.rhs - lhs)
                })
                .collect(),
            boxes: x
                .iter()
                .zip(&self.upper)
                .map(|(&v, &u)| v.inf(u - v))
                .collect(),
        }
    }

    /// Plain-text tableau: one line per row, then bounds.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tag {:?} vars {} rows {}", self.tag, self.num_vars(), self.rows.len());
        let fmt = |v: &[T]| v.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "max  {}", fmt(&self.objective));
        for row in &self.rows {
            let _ = writeln!(out, "{:?}  {}  <= {}", row.family, fmt(&row.coeffs), row.rhs);
        }
        let _ = writeln!(out, "upper  {}", fmt(&self.upper));
        out
    }

    pub fn solve(&self, tol: T) -> Result<LpSolution<T>> {
        self.check_shape()?;
        Simplex::new(self, tol).run()
    }
}

struct Simplex<T> {
    tol: T,
    n: usize,
    /// Constraint rows of `B^{-1} [A | I]`.
    tableau: Vec<Vec<T>>,
    /// Reduced costs `c_j - c_B B^{-1} a_j`.
    reduced: Vec<T>,
    cost: Vec<T>,
    upper: Vec<Option<T>>,
    basis: Vec<usize>,
    /// Current value of every variable, basic or not.
    x: Vec<T>,
    is_basic: Vec<bool>,
}

enum Step<T> {
    Flip(T),
    Pivot(usize, T),
}

impl<T: Scalar> Simplex<T> {
    fn new(lp: &LpProblem<T>, tol: T) -> Self {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let total = n + m;
        let tableau = lp
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.coeffs.clone();
                r.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
                r
            })
            .collect();
        let mut cost = lp.objective.clone();
        cost.extend(std::iter::repeat(T::zero()).take(m));
        let mut upper: Vec<Option<T>> = lp.upper.iter().map(|&u| Some(u)).collect();
        upper.extend(std::iter::repeat(None).take(m));
        let mut x = vec![T::zero(); total];
        for (i, row) in lp.rows.iter().enumerate() {
            x[n + i] = row.rhs;
        }
        let mut is_basic = vec![false; total];
        for flag in is_basic.iter_mut().skip(n) {
            *flag = true;
        }
        Self {
            tol,
            n,
            tableau,
            reduced: cost.clone(),
            cost,
            upper,
            basis: (n..total).collect(),
            x,
            is_basic,
        }
    }

    fn at_upper(&self, j: usize) -> bool {
        self.upper[j].map_or(false, |u| self.x[j] >= u)
    }

    /// Bland's rule: the lowest-index improving nonbasic variable.
    fn entering(&self) -> Option<(usize, bool)> {
        (0..self.cost.len()).find_map(|j| {
            if self.is_basic[j] {
                return None;
            }
            let d = self.reduced[j];
            if d > self.tol && !self.at_upper(j) {
                Some((j, true))
            } else if d < -self.tol && self.x[j] > T::zero() {
                Some((j, false))
            } else {
                None
            }
        })
    }

    fn ratio_test(&self, j: usize, increase: bool) -> Result<Step<T>> {
        let sign = if increase { T::one() } else { -T::one() };
        // (step length, variable index that blocks, pivot row or None for a flip)
        let mut best: Option<(T, usize, Option<usize>)> = None;
        let mut consider = |theta: T, var: usize, row: Option<usize>| {
            let better = match best {
                None => true,
                Some((b, bv, _)) => theta < b || (theta == b && var < bv),
            };
            if better {
                best = Some((theta, var, row));
            }
        };
        if let Some(u) = self.upper[j] {
            consider(u, j, None);
        }
        for (i, row) in self.tableau.iter().enumerate() {
            let a = sign * row[j];
            let b = self.basis[i];
            if a > self.tol {
                consider((self.x[b] / a).sup(T::zero()), b, Some(i));
            } else if a < -self.tol {
                if let Some(ub) = self.upper[b] {
                    consider(((ub - self.x[b]) / -a).sup(T::zero()), b, Some(i));
                }
            }
        }
        match best {
            None => Err(Error::Unbounded),
            Some((theta, _, None)) => Ok(Step::Flip(theta)),
            Some((theta, _, Some(i))) => Ok(Step::Pivot(i, theta)),
        }
    }

    fn advance(&mut self, j: usize, increase: bool, theta: T) {
        let delta = if increase { theta } else { -theta };
        for (i, row) in self.tableau.iter().enumerate() {
            let b = self.basis[i];
            self.x[b] = self.x[b] - row[j] * delta;
        }
        self.x[j] = self.x[j] + delta;
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let leaving = self.basis[r];
        let p = self.tableau[r][j];
        for v in self.tableau[r].iter_mut() {
            *v = *v / p;
        }
        let pivot_row = self.tableau[r].clone();
        for (i, row) in self.tableau.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j];
            if f != T::zero() {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v = *v - f * pv;
                }
            }
        }
        let f = self.reduced[j];
        for (v, &pv) in self.reduced.iter_mut().zip(&pivot_row) {
            *v = *v - f * pv;
        }
        // Snap the leaving variable exactly onto the bound it reached.
        let lv = self.x[leaving];
        self.x[leaving] = match self.upper[leaving] {
            Some(u) if (u - lv).magnitude() <= lv.magnitude() => u,
            _ => T::zero(),
        };
        self.basis[r] = j;
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
    }

    fn run(mut self) -> Result<LpSolution<T>> {
        let cap = 100_000 * self.cost.len().max(1);
        let mut iterations = 0;
        while let Some((j, increase)) = self.entering() {
            if iterations >= cap {
                return Err(Error::IterationLimit(cap));
            }
            iterations += 1;
            match self.ratio_test(j, increase)? {
                Step::Flip(theta) => {
                    self.advance(j, increase, theta);
                    self.x[j] = if increase {
                        self.upper[j].expect("flip needs a finite bound")
                    } else {
                        T::zero()
                    };
                }
                Step::Pivot(r, theta) => {
                    self.advance(j, increase, theta);
                    self.pivot(r, j);
                }
            }
        }
        let x: Vec<T> = self.x[..self.n]
            .iter()
            .zip(&self.upper)
            .map(|(&v, u)| v.sup(T::zero()).inf(u.unwrap_or(v)))
            .collect();
        let objective = self.cost[..self.n]
            .iter()
            .zip(&x)
            .fold(T::zero(), |acc, (&c, &v)| acc + c * v);
        Ok(LpSolution {
            x,
            objective,
            iterations,
        })
    }
}
