//! Property tests for the scheduling invariants: monotonicity, endpoint
//! pinning, closure against the parent array, pair validity, determinism
//! and the unique-level bound.

use proptest::prelude::*;

use cm_sched::analysis::{bucket_ratios, unique_level_audit, BucketSpec};
use cm_sched::schedule::{
    inject_high_noise, karras_sigmas, lognormal_schedule, polynomial_schedule, subsample_levels,
    KarrasParams, PolyScheduleParams,
};

fn karras_params() -> impl Strategy<Value = KarrasParams> {
    (
        1e-4f64..0.1,
        1.0f64..200.0,
        1.0f64..12.0,
        2usize..400,
    )
        .prop_map(|(sigma_min, sigma_max_mult, rho, s1)| KarrasParams {
            sigma_min,
            sigma_max: sigma_min * (1.0 + sigma_max_mult),
            rho,
            s1,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn karras_strictly_increasing_with_pinned_endpoints(params in karras_params()) {
        let array = karras_sigmas(&params).unwrap();
        let s = array.sigmas();
        prop_assert_eq!(s.len(), params.s1 + 1);
        for w in s.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        prop_assert!((s[0] - params.sigma_min).abs() / params.sigma_min < 1e-9);
        prop_assert!((s[params.s1] - params.sigma_max).abs() / params.sigma_max < 1e-9);
    }

    #[test]
    fn subsample_monotone_and_pinned(params in karras_params(), n_seed in 0u64..u64::MAX) {
        let array = karras_sigmas(&params).unwrap();
        let n_k = 1 + (n_seed as usize) % params.s1;
        let levels = subsample_levels(&array, n_k).unwrap();
        prop_assert_eq!(levels.indices().len(), n_k + 1);
        for w in levels.indices().windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        prop_assert_eq!(levels.indices()[0], 0);
        prop_assert_eq!(levels.indices()[n_k], params.s1);
        for (i, &idx) in levels.indices().iter().enumerate() {
            prop_assert_eq!(levels.sigmas()[i].to_bits(), array.sigmas()[idx].to_bits());
        }
    }

    #[test]
    fn polynomial_closure_pairs_and_determinism(
        curve in 0.5f64..6.0,
        jitter in 0.0f64..2.0,
        batch in 1usize..128,
        n_k in 2usize..250,
        seed in 0u64..1000,
    ) {
        let array = karras_sigmas(&KarrasParams::default()).unwrap();
        let levels = subsample_levels(&array, n_k).unwrap();
        let p = PolyScheduleParams { curve, jitter_std: jitter, batch_size: batch };
        let a = polynomial_schedule(&levels, &p, seed).unwrap();
        let b = polynomial_schedule(&levels, &p, seed).unwrap();
        prop_assert_eq!(&a, &b);
        a.check_invariants(&levels).unwrap();
        for j in 0..a.len() {
            prop_assert!(a.level_index[j] <= n_k - 1);
            prop_assert!(a.sigma_lo[j] < a.sigma_hi[j]);
            prop_assert!(array.contains_bits(a.sigma_lo[j]));
            prop_assert!(array.contains_bits(a.sigma_hi[j]));
        }
    }

    #[test]
    fn lognormal_closure_and_determinism(
        mean_log in -3.0f64..3.0,
        std_log in 0.1f64..3.0,
        batch in 1usize..128,
        n_k in 1usize..250,
        seed in 0u64..1000,
    ) {
        let array = karras_sigmas(&KarrasParams::default()).unwrap();
        let levels = subsample_levels(&array, n_k).unwrap();
        let a = lognormal_schedule(&levels, mean_log, std_log, batch, seed).unwrap();
        let b = lognormal_schedule(&levels, mean_log, std_log, batch, seed).unwrap();
        prop_assert_eq!(&a, &b);
        a.check_invariants(&levels).unwrap();
        prop_assert!(unique_level_audit(&[a], &array).unwrap() <= array.len());
    }

    #[test]
    fn injection_preserves_invariants(
        ratio in 0.0f64..1.0,
        n_k in 2usize..250,
        seed in 0u64..1000,
    ) {
        let array = karras_sigmas(&KarrasParams::default()).unwrap();
        let levels = subsample_levels(&array, n_k).unwrap();
        let base = lognormal_schedule(&levels, -1.1, 2.0, 64, seed).unwrap();
        let after = inject_high_noise(base, &levels, ratio, (40.0, 80.0), seed ^ 0xF00D).unwrap();
        after.check_invariants(&levels).unwrap();
        prop_assert!(unique_level_audit(&[after], &array).unwrap() <= array.len());
    }

    #[test]
    fn unique_levels_bounded_over_many_discretizations(
        seed in 0u64..500,
        n_ks in prop::collection::vec(2usize..250, 1..40),
    ) {
        let array = karras_sigmas(&KarrasParams::default()).unwrap();
        let mut batches = Vec::new();
        for (i, &n_k) in n_ks.iter().enumerate() {
            let levels = subsample_levels(&array, n_k).unwrap();
            batches.push(
                polynomial_schedule(
                    &levels,
                    &PolyScheduleParams { curve: 4.0, jitter_std: 1.0, batch_size: 32 },
                    seed + i as u64,
                )
                .unwrap(),
            );
        }
        prop_assert!(unique_level_audit(&batches, &array).unwrap() <= 251);
    }

    #[test]
    fn bucket_shares_sum_to_one(
        sigmas in prop::collection::vec(1e-3f64..100.0, 1..500),
    ) {
        let report = bucket_ratios(&sigmas, &BucketSpec::default()).unwrap();
        let total: f64 = report.bucket_shares.iter().sum::<f64>() + report.below_min_share;
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
