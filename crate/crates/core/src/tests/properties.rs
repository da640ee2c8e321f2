use proptest::prelude::*;

use crate::bumps::orlicz::luxemburg_values;
use crate::bumps::YoungFn;
use crate::functionals::{concavity_gap, u_star, DistributionFn, Variant};
use crate::random::{random_midpoint_pair, random_model, random_weight, trial_rng, ModelLaw, WeightLaw};
use crate::verify::{Context, Sample, SweepConfig, TheoremId};

fn small(seed: u64) -> SweepConfig {
    SweepConfig { seed, trials: Some(1), depth_max: 4, ..SweepConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn dyadic_theorems_hold_on_arbitrary_seeds(seed in any::<u64>(), trial in 0u64..1_000_000) {
        for t in [
            TheoremId::EmbedCarleson,
            TheoremId::EmbedHaar,
            TheoremId::Lerner2Sided,
            TheoremId::Shift2Sided,
            TheoremId::Para2Sided,
            TheoremId::SawyerK,
            TheoremId::OneWeight,
        ] {
            let ctx = Context::new(t, &small(seed)).unwrap();
            let e = ctx.evaluate(&ctx.generate(trial).unwrap()).unwrap();
            prop_assert!(e.passes(ctx.tolerance()), "{t}: {} > {}", e.lhs, e.rhs);
        }
    }

    #[test]
    fn instances_round_trip_through_json(seed in any::<u64>(), trial in 0u64..1000) {
        let ctx = Context::new(TheoremId::Shift2Sided, &small(seed)).unwrap();
        let s = ctx.generate(trial).unwrap();
        let text = serde_json::to_string(&s.to_case()).unwrap();
        let back = Sample::from_case(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(ctx.evaluate(&s).unwrap(), ctx.evaluate(&back).unwrap());
    }

    #[test]
    fn midpoint_gap_dominates_both_bounds(seed in any::<u64>()) {
        let (n, n1, n2) = random_midpoint_pair(&mut trial_rng(seed, 0), 5, 4.0);
        let g = concavity_gap(&n, &n1, &n2).unwrap();
        prop_assert!(g.gap >= g.bound - 1e-12 * g.gap.abs().max(1.0));
        prop_assert!(g.bound >= g.mass_bound - 1e-12 * g.bound.max(1.0));
    }

    #[test]
    fn luxemburg_norm_is_homogeneous(values in prop::collection::vec(0.01f64..100.0, 1..8), c in 0.01f64..100.0) {
        let masses: Vec<f64> = (0..values.len()).map(|i| 1.0 + i as f64).collect();
        let phi = YoungFn::tlog2();
        let scaled: Vec<f64> = values.iter().map(|v| c * v).collect();
        let (a, b) = (luxemburg_values(&values, &masses, &phi), luxemburg_values(&scaled, &masses, &phi));
        prop_assert!((b - c * a).abs() <= 1e-9 * b);
    }

    #[test]
    fn u_star_dominates_the_average(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let m = random_model(&mut rng, &ModelLaw { depth_max: 5, ..ModelLaw::default() });
        let w = random_weight(&mut rng, &m, &WeightLaw::default());
        let avg = m.averages(&w);
        for id in 0..m.len() {
            for v in [Variant::Lorentz, Variant::Maximal] {
                prop_assert!(u_star(&m, &w, id, v) >= avg[id] * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn distribution_of_scaled_function_rescales(values in prop::collection::vec(0.1f64..10.0, 1..6), lam in 0.1f64..10.0) {
        let masses = vec![1.0 / values.len() as f64; values.len()];
        let n = DistributionFn::from_values(&values, &masses);
        let scaled: Vec<f64> = values.iter().map(|v| lam * v).collect();
        let m = DistributionFn::from_values(&scaled, &masses);
        for t in [0.05, 0.5, 1.0, 3.0, 9.0] {
            prop_assert!((m.eval(lam * t) - n.eval(t)).abs() < 1e-12);
        }
    }
}
