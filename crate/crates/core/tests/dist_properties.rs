use alphasr::dist::generator::random_alpha_sr;
use alphasr::{Dist64, Discrete64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reserve_floor(alpha: f64) -> f64 {
    alpha.powf(1.0 / (1.0 - alpha))
}

fn generated(seed: u64, alpha: f64, levels: usize) -> Discrete64 {
    random_alpha_sr(&mut ChaCha8Rng::seed_from_u64(seed), alpha, levels).unwrap()
}

/// Probe values spread over the bulk and the tail of a continuous prior.
fn probes(d: &Dist64) -> Vec<f64> {
    (1..40)
        .map(|k| d.value_of_quantile(1.0 - k as f64 / 40.0).unwrap())
        .chain([1e-3, 0.1].into_iter())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn falpha_identities(alpha in 0.05f64..0.95, scale in 0.5f64..3.0) {
        let d = Dist64::falpha(alpha, scale).unwrap();
        let r = d.reserve_price().unwrap();
        prop_assert!((r - scale).abs() < 1e-8 * scale);
        prop_assert!((d.survival(r) - reserve_floor(alpha)).abs() < 1e-9);
        for v in probes(&d) {
            prop_assert!(((-d.cumulative_hazard(v)).exp() - d.survival(v)).abs() < 1e-6);
            let q = d.quantile_of_value(v);
            let back = d.value_of_quantile_by_bisection(q).unwrap();
            prop_assert!((back - v).abs() <= 1e-8 * (1.0 + v));
            if v >= r {
                let phi = d.virtual_valuation(v).unwrap();
                prop_assert!(v <= r + phi / alpha + 1e-9 * (1.0 + v));
            }
        }
        let (i1, i2) = (d.survival_power_integral(1), d.survival_power_integral(2));
        prop_assert!((i2 / i1 - alpha / (1.0 + alpha)).abs() < 1e-7);
    }

    #[test]
    fn falpha_density_and_revenue_bounds(alpha in 0.05f64..0.95) {
        let d = Dist64::falpha(alpha, 1.0).unwrap();
        let density_at = |q: f64| d.density(d.value_of_quantile(q).unwrap());
        let grid: Vec<f64> = (1..=30).map(|k| k as f64 / 31.0).collect();
        for &q0 in &grid {
            for &q in grid.iter().filter(|&&q| q <= q0) {
                let bound = density_at(q0) * (q / q0).powf(2.0 - alpha);
                prop_assert!(density_at(q) >= bound - 1e-8 * (1.0 + bound));
            }
        }
        let qr = d.survival(1.0);
        let cr_r = d.revenue_curve(qr).cr;
        for k in 1..=50 {
            let q = qr * k as f64 / 50.0;
            let x = q / qr;
            let bound = cr_r * (x.powf(alpha) - alpha * x) / (1.0 - alpha);
            prop_assert!(d.revenue_curve(q).cr <= bound + 1e-9);
        }
    }

    #[test]
    fn discrete_lemmas(seed in any::<u64>(), alpha in 0.05f64..0.95, levels in 2usize..9) {
        let dd = generated(seed, alpha, levels);
        let d = Dist64::from(dd.clone());
        let r = d.reserve_price().unwrap();
        let floor = reserve_floor(alpha);
        prop_assert!(dd.sale_probability(r) >= floor - 1e-9);

        let (i1, i2) = (d.survival_power_integral(1), d.survival_power_integral(2));
        prop_assert!(alpha / (1.0 + alpha) * i1 <= i2 + 1e-9);
        let e_max = 2.0 * i1 - i2;
        prop_assert!(e_max <= (2.0 + alpha) / alpha * i2 + 1e-9);

        let pot = (alpha / (2.0 - alpha)).powf(1.0 / (1.0 - alpha));
        prop_assert!(d.strong_virtual_probability(alpha) >= pot - 1e-9);

        for k in 0..=50 {
            let t = dd.max_value() * k as f64 / 50.0;
            let lhs = d.revenue_at_price(t.max(r));
            prop_assert!(lhs >= floor * d.posted_price_welfare(t) - 1e-6);
        }

        let support = dd.support().to_vec();
        for &v in support.iter().filter(|&&v| v >= r) {
            prop_assert!(v <= r + dd.virtual_valuation(v).unwrap() / alpha + 1e-9);
        }
        for (a, &v1) in support.iter().enumerate() {
            for &v2 in &support[a..] {
                let (Some(h1), Some(h2)) = (dd.hazard_rate(v1).unwrap(), dd.hazard_rate(v2).unwrap()) else {
                    continue;
                };
                let lower = 1.0 / ((1.0 - alpha) * (v2 - v1) + 1.0 / h1);
                prop_assert!(lower <= h2 * (1.0 + 1e-9));
                let gap = 1.0 / h2 - (1.0 - alpha) * (v2 - v1);
                if gap > 0.0 {
                    prop_assert!(h1 <= (1.0 / gap) * (1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn reserve_scales_with_values(seed in any::<u64>(), factor in 0.1f64..10.0) {
        let d = Dist64::from(generated(seed, 0.5, 5));
        let scaled = d.scaled(factor).unwrap();
        let (r, rs) = (d.reserve_price().unwrap(), scaled.reserve_price().unwrap());
        prop_assert!((rs - factor * r).abs() <= 1e-9 * rs);
        let c = Dist64::falpha(0.3, 1.0).unwrap().scaled(factor).unwrap();
        prop_assert!((c.reserve_price().unwrap() - factor).abs() <= 1e-9 * factor);
    }
}

#[test]
fn alpha_power_bound_on_a_grid() {
    for k in 1..100 {
        let alpha = k as f64 / 100.0;
        assert!((alpha + 1.0) / alpha <= alpha.powf(-1.0 / (1.0 - alpha)) + 1e-12, "alpha = {alpha}");
    }
}

#[test]
fn exponential_hazard_identity() {
    let d = Dist64::exponential(1.7).unwrap();
    for v in probes(&d) {
        assert!(((-d.cumulative_hazard(v)).exp() - d.survival(v)).abs() < 1e-6);
    }
}

#[test]
fn half_power_law_strong_virtual_mass() {
    let d = Dist64::falpha(0.5, 1.0).unwrap();
    assert!((d.strong_virtual_probability(0.5) - 1.0 / 9.0).abs() < 1e-9);
}
