//! Downward-closed feasibility systems over bidders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvKind {
    /// Every feasible set listed; closed under subsets.
    Explicit { sets: Vec<Vec<usize>> },
    /// Any set of at most `k` bidders.
    KUniform { k: usize },
    /// Each base bidder `i` also appears as copy `n + i`; a bidder and its copy
    /// are mutually exclusive and the projection must be feasible in the base.
    Duplicated { base: Box<Environment> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub bidders: usize,
    pub kind: EnvKind,
}

fn normalized(mut set: Vec<usize>) -> Vec<usize> {
    set.sort_unstable();
    set.dedup();
    set
}

impl Environment {
    /// Validates closure under subsets; the empty set is added if absent.
    pub fn explicit(bidders: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut sets: Vec<Vec<usize>> = sets.into_iter().map(normalized).collect();
        sets.push(Vec::new());
        sets.sort();
        sets.dedup();
        if sets.iter().flatten().any(|&i| i >= bidders) {
            return Err(Error::InvalidEnvironment("bidder index out of range".into()));
        }
        for s in &sets {
            for skip in 0..s.len() {
                let sub: Vec<usize> = s.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &i)| i).collect();
                if sets.binary_search(&sub).is_err() {
                    return Err(Error::InvalidEnvironment(format!("{s:?} is feasible but {sub:?} is not")));
                }
            }
        }
        Ok(Self {
            bidders,
            kind: EnvKind::Explicit { sets },
        })
    }

    pub fn k_uniform(bidders: usize, k: usize) -> Self {
        Self {
            bidders,
            kind: EnvKind::KUniform { k },
        }
    }

    pub fn single_item(bidders: usize) -> Self {
        Self::k_uniform(bidders, 1)
    }

    /// The environment over `2n` bidders pairing each bidder with a copy.
    pub fn with_duplicates(&self) -> Self {
        Self {
            bidders: 2 * self.bidders,
            kind: EnvKind::Duplicated {
                base: Box::new(self.clone()),
            },
        }
    }

    /// Checks structural validity after deserialisation.
    pub fn validated(self) -> Result<Self> {
        match self.kind {
            EnvKind::Explicit { sets } => Self::explicit(self.bidders, sets),
            EnvKind::Duplicated { ref base } if base.bidders * 2 != self.bidders => {
                Err(Error::InvalidEnvironment("duplicated environment has the wrong size".into()))
            }
            _ => Ok(self),
        }
    }

    pub fn is_feasible(&self, set: &[usize]) -> bool {
        let set = normalized(set.to_vec());
        if set.iter().any(|&i| i >= self.bidders) {
            return false;
        }
        match &self.kind {
            EnvKind::Explicit { sets } => sets.binary_search(&set).is_ok(),
            EnvKind::KUniform { k } => set.len() <= *k,
            EnvKind::Duplicated { base } => {
                let n = base.bidders;
                let projected = normalized(set.iter().map(|&i| i % n).collect());
                projected.len() == set.len() && base.is_feasible(&projected)
            }
        }
    }

    /// Feasible set of maximum total weight using only positive weights.
    ///
    /// Ties go to the lexicographically smallest sorted index list.
    pub fn best_set(&self, weights: &[f64]) -> (Vec<usize>, f64) {
        assert_eq!(weights.len(), self.bidders, "one weight per bidder");
        match &self.kind {
            EnvKind::Explicit { sets } => {
                let mut best: (Vec<usize>, f64) = (Vec::new(), 0.0);
                for s in sets {
                    if s.iter().any(|&i| weights[i] <= 0.0) {
                        continue;
                    }
                    let total: f64 = s.iter().map(|&i| weights[i]).sum();
                    if total > best.1 || (total == best.1 && *s < best.0) {
                        best = (s.clone(), total);
                    }
                }
                best
            }
            EnvKind::KUniform { k } => {
                let mut order: Vec<usize> = (0..self.bidders).filter(|&i| weights[i] > 0.0).collect();
                order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
                order.truncate(*k);
                order.sort_unstable();
                let total = order.iter().map(|&i| weights[i]).sum();
                (order, total)
            }
            EnvKind::Duplicated { base } => {
                let n = base.bidders;
                let pick: Vec<usize> = (0..n).map(|i| if weights[n + i] > weights[i] { n + i } else { i }).collect();
                let merged: Vec<f64> = pick.iter().map(|&i| weights[i]).collect();
                let (set, total) = base.best_set(&merged);
                (normalized(set.into_iter().map(|i| pick[i]).collect()), total)
            }
        }
    }

    /// Best value with bidder `i` removed.
    pub fn best_without(&self, weights: &[f64], i: usize) -> f64 {
        let mut w = weights.to_vec();
        w[i] = 0.0;
        self.best_set(&w).1
    }
}
