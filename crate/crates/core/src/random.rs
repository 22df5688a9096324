//! Seeded random states, channels and tangents.
//!
//! Every generator is a pure function of its parameters and seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::objects::{DensityMatrix, QuantumChannel, TangentDirection};

/// splitmix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed derived from a master seed and a trial index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex standard-Gaussian (Ginibre) matrix.
pub fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// `G G† / tr(G G†)` with `G` a `dim x rank` Ginibre matrix.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidShape(format!(
            "need 1 <= rank <= dim, got rank {rank}, dim {dim}"
        )));
    }
    let mut r = rng(seed);
    let g = ginibre(dim, rank, &mut r);
    let m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    DensityMatrix::from_matrix(m / C64::new(tr, 0.0))
}

/// Random CPTP map: orthonormalize a `(dim_out * kraus_count) x dim_in`
/// Ginibre matrix and slice it into Kraus blocks.
pub fn random_cptp(dim_in: usize, dim_out: usize, kraus_count: usize, seed: u64) -> Result<QuantumChannel> {
    if dim_in == 0 || dim_out == 0 || kraus_count == 0 {
        return Err(Error::InvalidShape(
            "channel dimensions and Kraus count must be positive".into(),
        ));
    }
    if dim_out * kraus_count < dim_in {
        return Err(Error::InvalidShape(format!(
            "dim_out * kraus_count = {} is smaller than dim_in = {dim_in}",
            dim_out * kraus_count
        )));
    }
    let mut r = rng(seed);
    let g = ginibre(dim_out * kraus_count, dim_in, &mut r);
    let q = g.qr().q();
    let kraus = (0..kraus_count)
        .map(|k| q.rows(k * dim_out, dim_out).into_owned())
        .collect();
    QuantumChannel::new(dim_in, dim_out, kraus)
}

/// Hermitian Gaussian matrix with its trace projected out.
pub fn random_tangent(dim: usize, seed: u64) -> Result<TangentDirection> {
    if dim == 0 {
        return Err(Error::InvalidShape("dimension must be positive".into()));
    }
    let mut r = rng(seed);
    let g = ginibre(dim, dim, &mut r);
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let shift = h.trace() / C64::new(dim as f64, 0.0);
    let x = h - CMat::identity(dim, dim) * shift;
    TangentDirection::from_matrix(x)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary(dim: usize, seed: u64) -> Result<CMat> {
    if dim == 0 {
        return Err(Error::InvalidShape("dimension must be positive".into()));
    }
    let mut r = rng(seed);
    let g = ginibre(dim, dim, &mut r);
    let qr = g.qr();
    let mut q = qr.q();
    let rm = qr.r();
    for j in 0..dim {
        let d = rm[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let ph = d / n;
            for i in 0..dim {
                q[(i, j)] *= ph;
            }
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_is_pure() {
        let rho = random_density(3, 1, 7).unwrap();
        let ev = &rho.eigen().unwrap().values;
        assert!(ev[0].abs() < 1e-12 && ev[1].abs() < 1e-12);
        assert!((ev[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cptp_completeness() {
        let ch = random_cptp(3, 2, 4, 8).unwrap();
        let mut s = CMat::zeros(3, 3);
        for k in ch.kraus() {
            s += k.adjoint() * k;
        }
        assert!((s - CMat::identity(3, 3)).norm() < 1e-10);
    }

    #[test]
    fn same_seed_bitwise_identical() {
        assert_eq!(
            random_density(4, 2, 99).unwrap().as_mat(),
            random_density(4, 2, 99).unwrap().as_mat()
        );
        assert_eq!(random_cptp(2, 2, 2, 5).unwrap(), random_cptp(2, 2, 2, 5).unwrap());
        assert_eq!(random_tangent(3, 1).unwrap(), random_tangent(3, 1).unwrap());
    }

    #[test]
    fn invalid_shapes() {
        assert!(random_density(2, 3, 0).is_err());
        assert!(random_cptp(4, 1, 2, 0).is_err());
    }

    #[test]
    fn unitary_is_unitary() {
        let u = random_unitary(4, 3).unwrap();
        assert!((u.adjoint() * &u - CMat::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, 0);
        let b = derive_seed(1, 1);
        let c = derive_seed(2, 0);
        assert!(a != b && a != c);
        assert_eq!(a, derive_seed(1, 0));
    }
}
