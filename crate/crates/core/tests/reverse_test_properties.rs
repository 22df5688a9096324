use proptest::prelude::*;
use qdiv_core::divergences::rld_entropy;
use qdiv_core::metrics::{classical_fisher, integral_divergence, metric_value, MonotoneMetricSpec};
use qdiv_core::objects::apply_channel;
use qdiv_core::random::{random_cptp, random_density, random_tangent};
use qdiv_core::reverse_test::{
    decomposition_competitor, optimal_reverse_test, parallel_decomposition, random_competitor_estimation,
    random_full_rank_pair, reverse_estimation_1param, splitting_competitor,
};
use qdiv_core::{DensityMatrix, TangentDirection};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rld_monotone_with_witness(din in 2usize..=3, dout in 2usize..=3, k in 2usize..=4, seed in any::<u64>()) {
        let (rho, sigma) = random_full_rank_pair(din, seed).unwrap();
        let ch = random_cptp(din, dout, k, seed ^ 77).unwrap();
        let rt = optimal_reverse_test(&rho, &sigma).unwrap();
        let witness = rt.then(&ch).unwrap();
        let (lr, ls) = (apply_channel(&ch, &rho).unwrap(), apply_channel(&ch, &sigma).unwrap());
        let (er, es) = witness.residuals(&lr, &ls).unwrap();
        prop_assert!(er <= 1e-9 && es <= 1e-9);
        let after = rld_entropy(&lr, &ls).unwrap().expect_finite().unwrap();
        prop_assert!(after <= witness.input_kl + 1e-8);
        prop_assert!((witness.input_kl - rt.input_kl).abs() <= 1e-12);
    }

    #[test]
    fn parallel_family_fisher(dim in 2usize..=3, t in 0.05f64..=0.95, seed in any::<u64>()) {
        let (rho, sigma) = random_full_rank_pair(dim, seed).unwrap();
        let dec = parallel_decomposition(&rho, &sigma).unwrap();
        let p_t = dec.mixture(t).unwrap();
        let dp: Vec<f64> = dec.p.probs().iter().zip(dec.q.probs()).map(|(a, b)| a - b).collect();
        let classical = classical_fisher(&p_t, &[dp]).unwrap().scalar().unwrap();
        let rho_t = rho.mix(&sigma, t).unwrap();
        let quantum = metric_value(&MonotoneMetricSpec::rld(), &rho_t, &TangentDirection::between(&rho, &sigma).unwrap()).unwrap();
        prop_assert!((classical - quantum).abs() <= 1e-8 * (1.0 + quantum), "{classical} vs {quantum}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn integral_matches_reverse_test(dim in 2usize..=3, seed in any::<u64>()) {
        let (rho, sigma) = random_full_rank_pair(dim, seed).unwrap();
        let rt = optimal_reverse_test(&rho, &sigma).unwrap();
        let est = integral_divergence(&MonotoneMetricSpec::rld(), &rho, &sigma, 64).unwrap();
        prop_assert!((est.value - rt.input_kl).abs() <= 1e-6, "{} vs {}", est.value, rt.input_kl);
    }

    #[test]
    fn competitors_do_not_beat_optimum(dim in 2usize..=3, seed in any::<u64>()) {
        let (rho, sigma) = random_full_rank_pair(dim, seed).unwrap();
        let best = optimal_reverse_test(&rho, &sigma).unwrap().input_kl;
        let c = decomposition_competitor(&rho, &sigma, seed).unwrap();
        let (er, es) = c.residuals(&rho, &sigma).unwrap();
        prop_assert!(er <= 1e-9 && es <= 1e-9);
        prop_assert!(c.input_kl >= best - 1e-8);
    }

    #[test]
    fn splitting_does_not_beat_kl(
        p in proptest::collection::vec(0.05f64..1.0, 3),
        q in proptest::collection::vec(0.05f64..1.0, 3),
        k in 2usize..=4,
        seed in any::<u64>(),
    ) {
        let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
        let p: Vec<f64> = p.iter().map(|v| v / sp).collect();
        let q: Vec<f64> = q.iter().map(|v| v / sq).collect();
        let rho = DensityMatrix::diagonal(&p).unwrap();
        let sigma = DensityMatrix::diagonal(&q).unwrap();
        let best = optimal_reverse_test(&rho, &sigma).unwrap().input_kl;
        let s = splitting_competitor(&rho, &sigma, k, seed).unwrap();
        let (er, es) = s.residuals(&rho, &sigma).unwrap();
        prop_assert!(er <= 1e-9 && es <= 1e-9);
        prop_assert!(s.input_kl >= best - 1e-10);
    }

    #[test]
    fn reverse_estimation_attains_rld(dim in 2usize..=3, extra in 0usize..=3, seed in any::<u64>()) {
        let rho = random_density(dim, dim, seed).unwrap();
        let x = random_tangent(dim, seed ^ 5).unwrap();
        let jr = metric_value(&MonotoneMetricSpec::rld(), &rho, &x).unwrap();
        let est = reverse_estimation_1param(&rho, &x).unwrap();
        let (r1, r2) = est.residuals(&rho, &x).unwrap();
        prop_assert!(r1 <= 1e-9 && r2 <= 1e-9);
        prop_assert!((est.input_fisher - jr).abs() <= 1e-8 * (1.0 + jr));
        let fisher = classical_fisher(&est.p, std::slice::from_ref(&est.dp)).unwrap().scalar().unwrap();
        prop_assert!((fisher - est.input_fisher).abs() <= 1e-8 * (1.0 + jr));

        let c = random_competitor_estimation(&rho, &x, extra, seed ^ 9).unwrap();
        let cf = classical_fisher(&c.p, std::slice::from_ref(&c.dp)).unwrap().scalar().unwrap();
        prop_assert!(cf >= jr - 1e-8 * (1.0 + jr), "{cf} < {jr}");
    }
}

#[test]
fn reverse_test_json_shape() {
    let (rho, sigma) = random_full_rank_pair(2, 1).unwrap();
    let rt = optimal_reverse_test(&rho, &sigma).unwrap();
    let v = serde_json::to_value(rt.to_json_value().unwrap()).unwrap();
    assert_eq!(v["frame"].as_array().unwrap().len(), 2);
    assert_eq!(v["p"].as_array().unwrap().len(), 2);
    assert!(v["input_kl"].as_f64().unwrap() > 0.0);
}
