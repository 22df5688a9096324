use proptest::prelude::*;
use qdiv_core::linalg::eigh;
use qdiv_core::metrics::{metric_value, petz_metric, rld_matrix, rld_operator, MonotoneMetricSpec};
use qdiv_core::objects::{apply_channel, apply_channel_tangent};
use qdiv_core::random::{random_cptp, random_density, random_tangent};
use qdiv_core::{CMat, DensityMatrix, HermitianMatrix, TangentDirection, C64};

fn specs() -> Vec<MonotoneMetricSpec> {
    let mut v = MonotoneMetricSpec::named().to_vec();
    v.push(MonotoneMetricSpec::alpha(0.5).unwrap());
    v.push(MonotoneMetricSpec::alpha(-2.0).unwrap());
    v
}

/// `<vec X, K^-1 vec Y>` with `K = R f(L R^-1)` built as a d^2 x d^2 matrix.
fn superoperator_metric(spec: &MonotoneMetricSpec, rho: &DensityMatrix, x: &CMat, y: &CMat) -> C64 {
    let d = rho.dim();
    let r = rho.as_mat();
    let id = CMat::identity(d, d);
    // column-major vec: vec(rho X) = (I (x) rho) vec X, vec(X rho) = (rho^T (x) I) vec X
    let right = r.transpose().kronecker(&id);
    let r_inv_t = r.clone().try_inverse().unwrap().transpose();
    let ratio = r_inv_t.kronecker(r);
    let h = HermitianMatrix::new((&ratio + ratio.adjoint()) * C64::new(0.5, 0.0)).unwrap();
    let e = eigh(&h).unwrap();
    let fvals: Vec<f64> = e.values.iter().map(|&v| spec.f(v).unwrap()).collect();
    let f_ratio = e.reconstruct_with(&fvals);
    let k = right * f_ratio;
    let vx = CMat::from_column_slice(d * d, 1, x.as_slice());
    let vy = CMat::from_column_slice(d * d, 1, y.as_slice());
    let sol = k.lu().solve(&vy).unwrap();
    (vx.adjoint() * sol)[(0, 0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metrics_are_monotone(din in 2usize..=3, dout in 2usize..=3, k in 2usize..=4, seed in any::<u64>()) {
        let rho = random_density(din, din, seed).unwrap();
        let x = random_tangent(din, seed ^ 3).unwrap();
        let ch = random_cptp(din, dout, k, seed ^ 5).unwrap();
        let (lr, lx) = (apply_channel(&ch, &rho).unwrap(), apply_channel_tangent(&ch, &x).unwrap());
        for spec in specs() {
            let before = metric_value(&spec, &rho, &x).unwrap();
            let after = metric_value(&spec, &lr, &lx).unwrap();
            prop_assert!(after <= before + 1e-8, "{spec}: {after} > {before}");
        }
    }

    #[test]
    fn superoperator_oracle(dim in 2usize..=3, seed in any::<u64>()) {
        // the d^2 x d^2 oracle loses digits on nearly singular states
        let rho = random_density(dim, dim, seed)
            .unwrap()
            .mix(&DensityMatrix::maximally_mixed(dim), 0.9)
            .unwrap();
        let x = random_tangent(dim, seed ^ 1).unwrap();
        let y = random_tangent(dim, seed ^ 2).unwrap();
        for spec in specs() {
            let got = petz_metric(&spec, &rho, &x, &y).unwrap();
            let want = superoperator_metric(&spec, &rho, x.as_mat(), y.as_mat());
            prop_assert!((got - want).norm() <= 1e-9 * (1.0 + want.norm()), "{spec}: {got} vs {want}");
        }
    }

    #[test]
    fn rld_matrix_imaginary_part(dim in 2usize..=3, seed in any::<u64>()) {
        let rho = random_density(dim, dim, seed)
            .unwrap()
            .mix(&DensityMatrix::maximally_mixed(dim), 0.9)
            .unwrap();
        let xs: Vec<TangentDirection> = (0..3).map(|i| random_tangent(dim, seed.wrapping_add(i)).unwrap()).collect();
        let j = rld_matrix(&rho, &xs).unwrap();
        let ls: Vec<CMat> = xs.iter().map(|x| rld_operator(&rho, x).unwrap().into_mat()).collect();
        for a in 0..3 {
            for b in 0..3 {
                let comm = &ls[a] * &ls[b] - &ls[b] * &ls[a];
                let t = (rho.as_mat() * comm).trace();
                // Tr rho [L_a, L_b] is purely imaginary and Im J_ab is half of it
                prop_assert!(t.re.abs() <= 1e-9);
                prop_assert!((j.im()[(a, b)] - 0.5 * t.im).abs() <= 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn metric_ordering(dim in 2usize..=4, seed in any::<u64>()) {
        let rho = random_density(dim, dim, seed).unwrap();
        let x = random_tangent(dim, seed ^ 9).unwrap();
        let vals: Vec<f64> = MonotoneMetricSpec::named()
            .iter()
            .map(|s| metric_value(s, &rho, &x).unwrap())
            .collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] - w[0] >= -1e-10, "{vals:?}");
        }
    }
}

#[test]
fn operator_monotone_spot_check() {
    // A <= B implies f(A) <= f(B) for the named functions, on random pairs
    for spec in specs() {
        for seed in 0..100u64 {
            let dim = 2 + (seed % 3) as usize;
            let a = random_density(dim, dim, seed).unwrap();
            let extra = random_density(dim, dim, seed + 1000).unwrap();
            let b = a.as_mat() + extra.as_mat() * C64::new(0.3, 0.0);
            let fa = spectral(&spec, a.as_mat());
            let fb = spectral(&spec, &b);
            let gap =
                eigh(&HermitianMatrix::new((&fb - &fa + (&fb - &fa).adjoint()) * C64::new(0.5, 0.0)).unwrap()).unwrap();
            assert!(gap.values[0] >= -1e-8, "{spec} seed {seed}");
        }
    }
}

fn spectral(spec: &MonotoneMetricSpec, m: &CMat) -> CMat {
    let e = eigh(&HermitianMatrix::new((m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap()).unwrap();
    let v: Vec<f64> = e.values.iter().map(|&x| spec.f(x).unwrap()).collect();
    e.reconstruct_with(&v)
}

#[test]
fn symmetric_under_inversion() {
    for spec in specs() {
        for k in 1..50 {
            let x = 0.05 * k as f64;
            let lhs = spec.f(x).unwrap();
            let rhs = x * spec.f(1.0 / x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs), "{spec} at {x}");
        }
    }
}
