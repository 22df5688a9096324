use proptest::prelude::*;
use qdiv_core::divergences::{dmax, fidelity_logdiv, kl, measured_div_lower, rld_entropy, umegaki, DivValue};
use qdiv_core::objects::apply_channel;
use qdiv_core::random::{random_cptp, random_density};
use qdiv_core::{ClassicalDistribution, DensityMatrix};

fn pair(dim: usize, seed: u64) -> (DensityMatrix, DensityMatrix) {
    (
        random_density(dim, dim, seed).unwrap(),
        random_density(dim, dim, seed ^ 0x9e37_79b9_7f4a_7c15).unwrap(),
    )
}

fn finite(v: DivValue) -> f64 {
    v.finite().expect("finite divergence")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn data_processing(din in 2usize..=3, dout in 2usize..=3, k in 2usize..=4, seed in any::<u64>()) {
        let (rho, sigma) = pair(din, seed);
        let ch = random_cptp(din, dout, k, seed.rotate_left(7)).unwrap();
        let (lr, ls) = (apply_channel(&ch, &rho).unwrap(), apply_channel(&ch, &sigma).unwrap());
        for f in [umegaki, rld_entropy, dmax] {
            let before = finite(f(&rho, &sigma).unwrap().value);
            let after = finite(f(&lr, &ls).unwrap().value);
            prop_assert!(after <= before + 1e-8, "{after} > {before}");
        }
    }

    #[test]
    fn sandwich(dim in 2usize..=3, seed in any::<u64>()) {
        let (rho, sigma) = pair(dim, seed);
        let (m, _) = measured_div_lower(&rho, &sigma, 100, seed).unwrap();
        let d = finite(umegaki(&rho, &sigma).unwrap().value);
        let dr = finite(rld_entropy(&rho, &sigma).unwrap().value);
        prop_assert!(finite(m) <= d + 1e-8);
        prop_assert!(d <= dr + 1e-8);
    }

    #[test]
    fn additivity(d1 in 2usize..=3, d2 in 2usize..=3, seed in any::<u64>()) {
        let (r1, s1) = pair(d1, seed);
        let (r2, s2) = pair(d2, seed.wrapping_add(1));
        let (r, s) = (r1.kron(&r2), s1.kron(&s2));
        for f in [umegaki, rld_entropy, dmax] {
            let whole = finite(f(&r, &s).unwrap().value);
            let parts = finite(f(&r1, &s1).unwrap().value) + finite(f(&r2, &s2).unwrap().value);
            // ln of a 1e7 eigenvalue ratio on a 1e-8-conditioned product is
            // only good to about 1e-10 relative
            prop_assert!((whole - parts).abs() <= 1e-9 * whole.abs().max(1.0), "{whole} vs {parts}");
        }
        let whole = finite(fidelity_logdiv(&r, &s).unwrap());
        let parts = finite(fidelity_logdiv(&r1, &s1).unwrap()) + finite(fidelity_logdiv(&r2, &s2).unwrap());
        prop_assert!((whole - parts).abs() <= 1e-9);
    }

    #[test]
    fn rld_joint_convexity(dim in 2usize..=3, lambda in 0.0f64..=1.0, seed in any::<u64>()) {
        let (r0, s0) = pair(dim, seed);
        let (r1, s1) = pair(dim, seed.wrapping_mul(3).wrapping_add(11));
        let left = lambda * finite(rld_entropy(&r0, &s0).unwrap().value)
            + (1.0 - lambda) * finite(rld_entropy(&r1, &s1).unwrap().value);
        let right = finite(rld_entropy(&r0.mix(&r1, lambda).unwrap(), &s0.mix(&s1, lambda).unwrap()).unwrap().value);
        prop_assert!(left >= right - 1e-8, "{left} < {right}");
    }

    #[test]
    fn commuting_pairs_reduce_to_kl(dim in 2usize..=4, seed in any::<u64>()) {
        let (a, b) = pair(dim, seed);
        let p: Vec<f64> = (0..dim).map(|i| a.as_mat()[(i, i)].re).collect();
        let q: Vec<f64> = (0..dim).map(|i| b.as_mat()[(i, i)].re).collect();
        let (rho, sigma) = (DensityMatrix::diagonal(&p).unwrap(), DensityMatrix::diagonal(&q).unwrap());
        let want = finite(kl(&ClassicalDistribution::new(p).unwrap(), &ClassicalDistribution::new(q).unwrap()).unwrap());
        for f in [umegaki, rld_entropy] {
            prop_assert!((finite(f(&rho, &sigma).unwrap().value) - want).abs() <= 1e-10);
        }
        let (m, _) = measured_div_lower(&rho, &sigma, 20, seed).unwrap();
        prop_assert!((finite(m) - want).abs() <= 1e-10);
    }
}

#[test]
fn support_violation_is_flagged() {
    let rho = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
    let sigma = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
    for f in [umegaki, rld_entropy, dmax] {
        assert_eq!(f(&rho, &sigma).unwrap().value, DivValue::PosInfinity);
    }
    // contained but unequal supports stay finite
    assert!(umegaki(&sigma, &rho).unwrap().value.is_finite());
}

#[test]
fn dmax_is_continuous_in_first_argument() {
    let (rho, sigma) = pair(3, 4);
    let tau = random_density(3, 3, 5).unwrap();
    let base = finite(dmax(&rho, &sigma).unwrap().value);
    let mut prev = f64::INFINITY;
    for delta in [1e-3, 1e-4, 1e-5, 1e-6] {
        let moved = tau.mix(&rho, delta).unwrap();
        let gap = (finite(dmax(&moved, &sigma).unwrap().value) - base).abs();
        assert!(gap < prev, "gap {gap} at {delta}");
        assert!(gap < 0.05);
        prev = gap;
    }
}
