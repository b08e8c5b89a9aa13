use alphasr::{Dist64, EmpiricalModel, SampleParams};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params(m: usize) -> SampleParams {
    SampleParams::new(m, 0.1, 0.05, 0.05).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelope_is_concave_and_dominates(samples in prop::collection::vec(0.0f64..20.0, 1..200)) {
        let em = EmpiricalModel::build(&samples, &params(samples.len())).unwrap();
        let slopes = em.envelope().slopes();
        for w in slopes.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
        for k in 0..=200 {
            let q = k as f64 / 200.0;
            prop_assert!(em.envelope_revenue(q) >= em.raw_revenue(q) - 1e-12);
        }
    }

    #[test]
    fn build_is_order_independent(samples in prop::collection::vec(0.0f64..5.0, 1..100), seed in any::<u64>()) {
        let p = params(samples.len());
        let a = EmpiricalModel::build(&samples, &p).unwrap();
        let mut shuffled = samples.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(&a, &EmpiricalModel::build(&shuffled, &p).unwrap());
        prop_assert_eq!(&a, &EmpiricalModel::build(&samples, &p).unwrap());
    }

    #[test]
    fn value_inverse_matches_a_segment_scan(samples in prop::collection::vec(0.0f64..20.0, 2..200), v in 0.01f64..25.0) {
        let em = EmpiricalModel::build(&samples, &params(samples.len())).unwrap();
        prop_assume!(v < em.point_mass_value());
        // Largest q >= ξ̄ with R̄(q) >= v q, checked segment by segment.
        let mut knots = vec![(em.xi_bar(), em.raw_revenue(em.xi_bar()))];
        knots.extend(em.revenue_points().iter().copied().filter(|p| p.0 > em.xi_bar()));
        let mut best = em.xi_bar();
        for w in knots.windows(2) {
            let ((q0, r0), (q1, r1)) = (w[0], w[1]);
            if r1 >= v * q1 {
                best = best.max(q1);
            } else if r0 >= v * q0 {
                // R̄ - v q is linear on the segment and changes sign inside it.
                let t = (r0 - v * q0) / ((r0 - v * q0) - (r1 - v * q1));
                best = best.max(q0 + t * (q1 - q0));
            }
        }
        prop_assert!((em.quantile_of_value(v) - best).abs() <= 1e-9, "{} vs {}", em.quantile_of_value(v), best);
    }

    #[test]
    fn capped_samples_bound_the_envelope(samples in prop::collection::vec(0.0f64..20.0, 1..200), cap in 1.0f64..10.0) {
        let capped: Vec<f64> = samples.iter().map(|v| v.min(cap)).collect();
        let em = EmpiricalModel::build(&capped, &params(capped.len())).unwrap();
        for k in 0..=100 {
            let q = k as f64 / 100.0;
            prop_assert!(em.envelope_revenue(q) <= cap * q + 1e-12);
        }
    }
}

#[test]
fn guarantees_hold_on_covered_builds() {
    let gamma = 0.1;
    let p = SampleParams::new(20_000, gamma, 0.05, 0.05).unwrap();
    let mut covered = 0;
    for (k, alpha) in [0.3, 0.5, 0.8].into_iter().enumerate() {
        let truth = Dist64::falpha(alpha, 1.0).unwrap();
        for t in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 * k as u64 + t);
            let em = EmpiricalModel::build(&truth.sample(&mut rng, p.m), &p).unwrap();
            if !em.coverage_event_holds(&truth, gamma) {
                continue;
            }
            covered += 1;
            let s = em.guarantee_slacks(&truth, gamma, Some(alpha)).unwrap();
            assert!(s.reserve_revenue >= -1e-9, "{s:?}");
            assert!(s.curve_lower >= -1e-9, "{s:?}");
            assert!(s.curve_upper >= -1e-9, "{s:?}");
            assert!(s.reserve_quantile.unwrap() >= -1e-9, "{s:?}");
        }
    }
    assert!(covered > 0);
}
