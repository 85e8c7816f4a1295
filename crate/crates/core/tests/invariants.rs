use dispersed::oblivious::{self, OrKind, UVariant, VarEstimator};
use dispersed::oracle::exact_moments;
use dispersed::weighted;
use dispersed::{consistent_set, hash_seed, sampling, DataVector, FunctionTag, Outcome, SamplingSpec, SeedVector};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn values(r: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..10.0f64], r)
}

fn probs(r: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05..1.0f64, r)
}

fn binary(r: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), Just(1.0)], r)
}

fn mean_of<E: Fn(&Outcome) -> dispersed::Result<f64>>(est: E, p: &[f64], v: &[f64]) -> f64 {
    exact_moments(est, &SamplingSpec::oblivious(p.to_vec()).unwrap(), &DataVector::new(v.to_vec()).unwrap()).unwrap().mean
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn seeds_are_unit_interval_and_deterministic(salt: u64, key: Vec<u8>) {
        let u = hash_seed(salt, &key);
        prop_assert!((0.0..1.0).contains(&u));
        prop_assert_eq!(u.to_bits(), hash_seed(salt, &key).to_bits());
    }

    #[test]
    fn sampled_vector_lies_in_its_consistent_set(v in values(3), p in probs(3), tau in prop::collection::vec(1.0..20.0f64, 3), u in prop::collection::vec(0.0..1.0f64, 3)) {
        let dv = DataVector::new(v.clone()).unwrap();
        let seeds = SeedVector::new(u).unwrap();
        for spec in [SamplingSpec::oblivious(p.clone()).unwrap(), SamplingSpec::pps(tau.clone()).unwrap()] {
            let o = sampling::sample(&dv, &spec, &seeds).unwrap();
            prop_assert!(consistent_set(&o, &spec).unwrap().contains(&v));
        }
    }

    #[test]
    fn max_l_unbiased_general_p(r in 1usize..=3, v in values(3), p in probs(3)) {
        let (v, p) = (&v[..r], &p[..r]);
        let want = v.iter().copied().fold(0.0, f64::max);
        let m = mean_of(|o| oblivious::est_max_l(o, p), p, v);
        prop_assert!(close(m, want, 1e-10), "{m} vs {want}");
    }

    #[test]
    fn max_l_uniform_unbiased(r in 2usize..=5, v in values(5), p in 0.1..1.0f64) {
        let v = &v[..r];
        let c = oblivious::coeff_max_l_uniform(r, p).unwrap();
        let m = mean_of(|o| oblivious::est_max_l_uniform(o, &c), &vec![p; r], v);
        prop_assert!(close(m, v.iter().copied().fold(0.0, f64::max), 1e-10));
    }

    #[test]
    fn max_u_and_ht_unbiased(v in values(2), p in probs(2)) {
        let want = v[0].max(v[1]);
        for variant in [UVariant::Symmetric, UVariant::Asymmetric] {
            let m = mean_of(|o| oblivious::est_max_u_r2(o, p[0], p[1], variant), &p, &v);
            prop_assert!(close(m, want, 1e-10));
        }
        prop_assert!(close(mean_of(|o| oblivious::est_ht(o, &p, FunctionTag::Max), &p, &v), want, 1e-10));
    }

    #[test]
    fn or_estimators_unbiased(v in binary(3), p in probs(3), r in 2usize..=3) {
        let (v, p) = (&v[..r], &p[..r]);
        let want = v.iter().copied().fold(0.0, f64::max);
        let kinds: &[OrKind] = if r == 2 { &[OrKind::Ht, OrKind::L, OrKind::U] } else { &[OrKind::Ht, OrKind::L] };
        for &k in kinds {
            prop_assert!(close(mean_of(|o| oblivious::est_or(o, p, k), p, v), want, 1e-10), "{k:?}");
        }
    }

    #[test]
    fn l_estimates_are_nonnegative(v in values(3), p in probs(3), u in prop::collection::vec(0.0..1.0f64, 3)) {
        let o = sampling::sample_oblivious(&DataVector::new(v).unwrap(), &p, &SeedVector::new(u).unwrap(), false).unwrap();
        prop_assert!(oblivious::est_max_l(&o, &p).unwrap() >= -1e-12);
    }

    #[test]
    fn closed_form_variances_match_enumeration(v in values(2), p in probs(2)) {
        let dv = DataVector::new(v.clone()).unwrap();
        let spec = SamplingSpec::oblivious(p.clone()).unwrap();
        let cases: Vec<(VarEstimator, Box<dyn Fn(&Outcome) -> dispersed::Result<f64>>)> = vec![
            (VarEstimator::Ht(FunctionTag::Max), Box::new(|o| oblivious::est_ht(o, &p, FunctionTag::Max))),
            (VarEstimator::MaxLR2, Box::new(|o| oblivious::est_max_l_r2(o, p[0], p[1]))),
            (VarEstimator::MaxUR2(UVariant::Symmetric), Box::new(|o| oblivious::est_max_u_r2(o, p[0], p[1], UVariant::Symmetric))),
        ];
        for (k, est) in cases {
            let closed = oblivious::var_closed_form(&dv, &p, k).unwrap().value;
            let enumerated = exact_moments(est, &spec, &dv).unwrap().variance;
            prop_assert!(close(closed, enumerated, 1e-9), "{k:?}: {closed} vs {enumerated}");
        }
    }

    #[test]
    fn uniform_coefficients_sum_and_residuals(r in 1usize..=40, p in 0.05..1.0f64) {
        let c = oblivious::coeff_max_l_uniform(r, p).unwrap();
        // the α alternate in sign with magnitudes ~ p^-r, so the sum is only
        // good to rounding relative to Σ|α|
        let total: f64 = c.alpha.iter().sum();
        let scale: f64 = c.alpha.iter().map(|a| a.abs()).sum();
        prop_assert!((total - 1.0 / (1.0 - (1.0 - p).powi(r as i32))).abs() <= 1e-13 * scale);
        prop_assert!(oblivious::coefficient_residuals(&c).iter().all(|x| x.abs() <= 1e-8));
    }

    #[test]
    fn weighted_binary_or_mapping_matches_table(v in binary(2), p in probs(2), u in prop::collection::vec(0.0..1.0f64, 2)) {
        let tau: Vec<f64> = p.iter().map(|p| 1.0 / p).collect();
        let o = sampling::sample_pps(&DataVector::new(v).unwrap(), &tau, &SeedVector::new(u).unwrap(), true).unwrap();
        for k in [OrKind::Ht, OrKind::L, OrKind::U] {
            let a = weighted::est_or_ws(&o, &p, k).unwrap();
            let b = weighted::est_or_ws_table(&o, &p, k).unwrap();
            prop_assert!(close(a, b, 1e-12), "{k:?}: {a} vs {b}");
        }
    }

    #[test]
    fn weighted_estimates_nonnegative(v in prop::collection::vec(0.0..3.0f64, 2), tau in prop::collection::vec(0.5..4.0f64, 2), u in prop::collection::vec(0.0..1.0f64, 2)) {
        let o = sampling::sample_pps(&DataVector::new(v).unwrap(), &tau, &SeedVector::new(u).unwrap(), true).unwrap();
        prop_assert!(weighted::est_max_l_ws_r2(&o, &tau).unwrap() >= -1e-12);
        prop_assert!(weighted::est_max_ht_ws(&o, &tau).unwrap() >= 0.0);
    }
}
