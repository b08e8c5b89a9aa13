//! Brute-force reference computations, kept independent of the library's
//! own solvers so that agreement is evidence.

use alphasr::lp::LpProblem;
use alphasr::mech::Environment;
use alphasr::{Discrete64, Dist64};
use anyhow::{ensure, Result};
use nalgebra::{DMatrix, DVector};

/// Largest profile count the enumerating oracles accept.
pub const MAX_PROFILES: usize = 5_000_000;

/// Virtual values ironed by pooling adjacent violators, mass-weighted.
///
/// The result is nondecreasing along the support and preserves every pooled
/// block's mass-weighted mean, which is the slope of the revenue curve's
/// concave envelope over that block.
pub fn ironed_virtual_values(d: &Discrete64) -> Vec<f64> {
    let phi = d.virtual_values();
    // Blocks of (weighted mean, weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(phi.len());
    for (&x, &w) in phi.iter().zip(d.pmf()) {
        blocks.push((x, w, 1));
        while blocks.len() >= 2 && blocks[blocks.len() - 2].0 > blocks[blocks.len() - 1].0 {
            let (b, wb, nb) = blocks.pop().expect("two blocks");
            let (a, wa, na) = blocks.pop().expect("two blocks");
            blocks.push(((a * wa + b * wb) / (wa + wb), wa + wb, na + nb));
        }
    }
    blocks.into_iter().flat_map(|(x, _, n)| std::iter::repeat(x).take(n)).collect()
}

/// Weighted sum of `f` over every value profile of independent discrete priors.
pub fn exact_expectation(dists: &[Discrete64], mut f: impl FnMut(&[f64]) -> f64) -> Result<f64> {
    let profiles = dists.iter().try_fold(1usize, |acc, d| acc.checked_mul(d.len()));
    ensure!(
        profiles.is_some_and(|p| p <= MAX_PROFILES),
        "too many value profiles to enumerate"
    );
    let n = dists.len();
    let mut idx = vec![0usize; n];
    let mut values: Vec<f64> = dists.iter().map(|d| d.support()[0]).collect();
    let mut total = 0.0;
    loop {
        let weight: f64 = dists.iter().zip(&idx).map(|(d, &k)| d.pmf()[k]).product();
        total += weight * f(&values);
        let mut b = 0;
        loop {
            if b == n {
                return Ok(total);
            }
            idx[b] += 1;
            if idx[b] < dists[b].len() {
                values[b] = dists[b].support()[idx[b]];
                break;
            }
            idx[b] = 0;
            values[b] = dists[b].support()[0];
            b += 1;
        }
    }
}

/// Optimal single-item revenue `E[max(0, max_i φ̄_i(v_i))]` by enumerating profiles.
pub fn optimal_revenue_single_item(dists: &[Discrete64]) -> Result<f64> {
    let ironed: Vec<Vec<f64>> = dists.iter().map(ironed_virtual_values).collect();
    exact_expectation(dists, |values| {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| ironed[i][dists[i].index_of(v).expect("profile value in support")])
            .fold(0.0, f64::max)
    })
}

/// The same optimum as `∫_0^∞ (1 - Π_i Pr[φ̄_i ≤ t]) dt`, linear in total support size.
pub fn myerson_revenue_bound(dists: &[Discrete64]) -> f64 {
    let ironed: Vec<Vec<f64>> = dists.iter().map(ironed_virtual_values).collect();
    let mut cuts: Vec<f64> = ironed.iter().flatten().copied().filter(|&x| x > 0.0).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let below = |t: f64| -> f64 {
        dists
            .iter()
            .zip(&ironed)
            .map(|(d, phi)| d.pmf().iter().zip(phi).filter(|&(_, &x)| x <= t).map(|(p, _)| p).sum::<f64>())
            .product()
    };
    let mut total = 0.0;
    let mut lo = 0.0;
    for &hi in &cuts {
        total += (hi - lo) * (1.0 - below(lo));
        lo = hi;
    }
    total
}

/// `min(V, B)` for independent `V` and a discrete budget `B`, with values
/// rounded up to multiples of `step`. The rounded prior dominates the true one,
/// so revenue bounds computed from it are upper bounds.
pub fn capped_prior(values: &Dist64, budget: &Discrete64, step: f64) -> Result<Discrete64> {
    ensure!(step > 0.0, "grid step must be positive");
    let top = budget.max_value();
    let cells = (top / step).ceil() as usize;
    ensure!(cells >= 1 && cells <= 1_000_000, "grid too fine for the budget range");
    let above = |x: f64| values.survival(x) * budget.survival(x);
    let mut support = Vec::with_capacity(cells);
    let mut pmf = Vec::with_capacity(cells);
    let mut prev = 1.0;
    for k in 1..=cells {
        let g = k as f64 * step;
        let next = if k == cells { 0.0 } else { above(g) };
        if prev - next > 0.0 {
            support.push(g);
            pmf.push(prev - next);
        }
        prev = next;
    }
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|p| *p /= total);
    Ok(Discrete64::new(support, pmf)?)
}

/// Feasible set of maximum total weight by exhaustive search over subsets.
///
/// Only sets of positively weighted bidders compete; ties go to the
/// lexicographically smallest sorted index list.
pub fn feasible_argmax(env: &Environment, weights: &[f64]) -> (Vec<usize>, f64) {
    let n = weights.len();
    assert!(n <= 20, "exhaustive search limited to 20 bidders");
    let mut best: (Vec<usize>, f64) = (Vec::new(), 0.0);
    for mask in 0u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if set.iter().any(|&i| weights[i] <= 0.0) || !env.is_feasible(&set) {
            continue;
        }
        let total: f64 = set.iter().map(|&i| weights[i]).sum();
        if total > best.1 || (total == best.1 && set < best.0) {
            best = (set, total);
        }
    }
    best
}

/// Optimum of `max c·x, A x <= b, 0 <= x <= u` over all basic points.
///
/// Every choice of `n` tight constraints among rows, lower and finite upper
/// bounds is solved directly; feasible solutions within `1e-9` compete.
pub fn lp_vertex_optimum(lp: &LpProblem<f64>) -> Result<f64> {
    let n = lp.num_vars();
    ensure!(n <= 8, "vertex enumeration limited to 8 variables");
    let mut planes: Vec<(Vec<f64>, f64)> = lp.rows.iter().map(|r| (r.coeffs.clone(), r.rhs)).collect();
    for k in 0..n {
        let mut unit = vec![0.0; n];
        unit[k] = -1.0;
        planes.push((unit.clone(), 0.0));
        if lp.upper[k].is_finite() {
            unit[k] = 1.0;
            planes.push((unit, lp.upper[k]));
        }
    }
    let feasible = |x: &DVector<f64>| {
        planes
            .iter()
            .all(|(a, b)| a.iter().zip(x.iter()).map(|(p, q)| p * q).sum::<f64>() <= b + 1e-9)
    };
    let mut best: Option<f64> = None;
    let mut choose: Vec<usize> = (0..n).collect();
    loop {
        let a = DMatrix::from_fn(n, n, |r, c| planes[choose[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| planes[choose[r]].1);
        if let Some(x) = a.lu().solve(&b) {
            if x.iter().all(|v| v.is_finite()) && feasible(&x) {
                let value = lp.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum::<f64>();
                best = Some(best.map_or(value, |b: f64| b.max(value)));
            }
        }
        // Next n-combination of plane indices in lexicographic order.
        let m = planes.len();
        let Some(pos) = (0..n).rev().find(|&p| choose[p] < m - n + p) else {
            break;
        };
        choose[pos] += 1;
        for p in pos + 1..n {
            choose[p] = choose[p - 1] + 1;
        }
    }
    best.ok_or_else(|| anyhow::anyhow!("no basic feasible point"))
}

/// `∫_E^∞ S(s + x)^k dx` for the power-law survival `S(v) = (1 + c v / s)^{-p}`.
fn power_tail(scale: f64, c: f64, p: f64, edge: f64, k: f64) -> f64 {
    (scale / c) * (1.0 + c * (scale + edge) / scale).powf(1.0 - k * p) / (k * p - 1.0)
}

/// Optimal revenue from `n` i.i.d. power-law bidders with strong-regularity
/// parameter `alpha`: `alpha ∫_0^∞ (1 - F(scale + x)^n) dx`.
///
/// Integrated by composite Simpson on a geometric grid until the survival drops
/// below `1e-7`; the rest uses the first two inclusion-exclusion terms in closed form.
pub fn power_law_optimal_revenue(alpha: f64, scale: f64, n: u32) -> f64 {
    let c = (1.0 - alpha) / alpha;
    let p = 1.0 / (1.0 - alpha);
    let survival = |v: f64| (1.0 + c * v / scale).powf(-p);
    let integrand = |x: f64| 1.0 - (1.0 - survival(scale + x)).powi(n as i32);
    let simpson = |a: f64, b: f64| {
        let panels = 64;
        let h = (b - a) / panels as f64;
        let inner: f64 = (1..panels)
            .map(|k| integrand(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 })
            .sum();
        (integrand(a) + integrand(b) + inner) * h / 3.0
    };
    let (mut lo, mut width, mut body) = (0.0, scale / 64.0, 0.0);
    while survival(scale + lo) > 1e-7 {
        body += simpson(lo, lo + width);
        lo += width;
        width *= 1.25;
    }
    let nf = n as f64;
    let tail = nf * power_tail(scale, c, p, lo, 1.0) - nf * (nf - 1.0) / 2.0 * power_tail(scale, c, p, lo, 2.0);
    alpha * (body + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alphasr::dist::generator::random_alpha_sr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_point() -> Discrete64 {
        Discrete64::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn single_item_revenue_examples() {
        assert!((optimal_revenue_single_item(&[two_point()]).unwrap() - 1.0).abs() < 1e-12);
        assert!((optimal_revenue_single_item(&[two_point(), two_point()]).unwrap() - 1.5).abs() < 1e-12);
        let flat = Discrete64::new(vec![3.0], vec![1.0]).unwrap();
        assert!((optimal_revenue_single_item(&[flat]).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ironing_pools_a_dip() {
        // Unironed virtual values (0, -1, 3) on {1, 2, 3} with masses (0.5, 0.25, 0.25).
        let d = Discrete64::new(vec![1.0, 2.0, 3.0], vec![0.5, 0.25, 0.25]).unwrap();
        let raw = d.virtual_values();
        let ironed = ironed_virtual_values(&d);
        for w in ironed.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let mean = |x: &[f64]| x.iter().zip(d.pmf()).map(|(a, b)| a * b).sum::<f64>();
        assert!((mean(&raw) - mean(&ironed)).abs() < 1e-12);
    }

    #[test]
    fn integral_form_matches_enumeration() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 1 + seed as usize % 3;
            let dists: Vec<Discrete64> = (0..n).map(|_| random_alpha_sr(&mut rng, 0.3, 4).unwrap()).collect();
            let a = optimal_revenue_single_item(&dists).unwrap();
            assert!((a - myerson_revenue_bound(&dists)).abs() < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn argmax_examples() {
        let k1 = Environment::k_uniform(2, 1);
        assert_eq!(feasible_argmax(&k1, &[3.0, 2.0]).0, vec![0]);
        assert_eq!(feasible_argmax(&Environment::k_uniform(0, 1), &[]).0, Vec::<usize>::new());
        let all = Environment::explicit(2, vec![vec![0], vec![1], vec![0, 1]]).unwrap();
        assert_eq!(feasible_argmax(&all, &[1.0, 1.0]).0, vec![0, 1]);
        assert_eq!(feasible_argmax(&k1, &[2.0, 2.0]).0, vec![0]);
    }

    #[test]
    fn vcg_expectation_on_two_point_priors() {
        // Second price on {1,2}²: revenue 1 unless both bid 2.
        let env = Environment::single_item(2);
        let r = exact_expectation(&[two_point(), two_point()], |v| alphasr::mech::vcg(&env, v).unwrap().revenue).unwrap();
        assert!((r - 1.25).abs() < 1e-15);
    }

    #[test]
    fn vertex_enumeration_on_a_square() {
        let lp = LpProblem::generic(vec![1.0, 2.0], vec![(vec![1.0, 1.0], 1.5)], vec![1.0, 1.0]).unwrap();
        assert!((lp_vertex_optimum(&lp).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn power_law_revenue() {
        assert!((power_law_optimal_revenue(0.5, 1.0, 1) - 0.25).abs() < 1e-9);
        let scaled = power_law_optimal_revenue(0.5, 3.0, 2);
        assert!((scaled - 3.0 * power_law_optimal_revenue(0.5, 1.0, 2)).abs() < 1e-8);
        let d = Dist64::falpha(0.3, 1.0).unwrap();
        let single = d.revenue_at_price(d.reserve_price().unwrap());
        assert!((power_law_optimal_revenue(0.3, 1.0, 1) - single).abs() < 1e-8);
    }

    #[test]
    fn capped_prior_with_a_point_budget() {
        let d = Dist64::falpha(0.5, 1.0).unwrap();
        let b = Discrete64::new(vec![2.0], vec![1.0]).unwrap();
        let c = capped_prior(&d, &b, 0.5).unwrap();
        assert_eq!(c.support(), &[0.5, 1.0, 1.5, 2.0]);
        assert!((c.pmf()[3] - d.survival(1.5)).abs() < 1e-12);
        assert!((c.pmf()[0] - d.cdf(0.5)).abs() < 1e-12);
    }
}
