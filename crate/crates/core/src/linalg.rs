//! Dense complex Hermitian linear algebra.
//!
//! Eigendecompositions and SVDs are delegated to `nalgebra`; this module adds
//! the deterministic ordering, support thresholds and PSD repair policy the
//! rest of the crate relies on.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Eigenvalues at or below this fraction of the largest magnitude count as zero.
pub const SUPPORT_REL: f64 = 1e-12;
/// Negative eigenvalues above `-PSD_CLIP_REL * lambda_max` are roundoff and get clipped.
pub const PSD_CLIP_REL: f64 = 1e-10;
/// Relative Hermiticity defect tolerated at construction.
pub const HERMITIAN_REL: f64 = 1e-12;

const EIGEN_ITER_PER_DIM: usize = 1000;
const SVD_EPS_FACTOR: f64 = 5.0;

/// General complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(CMat);

impl ComplexMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidShape("matrix must be at least 1x1".into()));
        }
        if !all_finite(&m) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }
}

/// Complex Hermitian matrix. The stored entries are exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    /// Validates Hermiticity against a relative tolerance, then stores the
    /// exact Hermitian part.
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidShape("matrix must be at least 1x1".into()));
        }
        if !all_finite(&m) {
            return Err(Error::NonFinite);
        }
        let scale = max_abs(&m);
        let defect = hermitian_defect(&m);
        if defect > HERMITIAN_REL * scale {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self(hermitian_part(&m)))
    }

    /// Takes the Hermitian part without checking the defect. Used for values
    /// that are Hermitian by construction up to roundoff.
    pub(crate) fn hermitize(m: CMat) -> Self {
        Self(hermitian_part(&m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMat::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMat::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(CMat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        is_diagonal(&self.0)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self(self.0.map(|z| z * a))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }
}

/// Eigenvalues ascending with unitary eigenvectors paired column by column.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Threshold below which an eigenvalue counts as zero.
    pub fn support_threshold(&self) -> f64 {
        SUPPORT_REL * self.max_abs_value()
    }

    /// Indices of eigenvalues strictly above the support threshold.
    pub fn support_indices(&self) -> Vec<usize> {
        let thr = self.support_threshold();
        (0..self.dim()).filter(|&k| self.values[k] > thr).collect()
    }

    pub fn rank(&self) -> usize {
        self.support_indices().len()
    }

    /// Orthonormal basis (as columns) of the support.
    pub fn support_basis(&self) -> CMat {
        let idx = self.support_indices();
        columns(&self.vectors, &idx)
    }

    pub fn support_projector(&self) -> CMat {
        let b = self.support_basis();
        &b * b.adjoint()
    }

    /// `V diag(f(lambda)) V^dagger` for precomputed function values.
    pub fn reconstruct_with(&self, fvals: &[f64]) -> CMat {
        reconstruct(&self.vectors, fvals)
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues and canonical
/// eigenvector phases (largest-magnitude component real positive).
pub fn eigh(h: &HermitianMatrix) -> Result<EigenSystem> {
    eigh_mat(h.as_mat())
}

pub(crate) fn eigh_mat(m: &CMat) -> Result<EigenSystem> {
    let n = m.nrows();
    if is_diagonal(m) {
        let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
        let values = order.iter().map(|&i| diag[i]).collect();
        let vectors = CMat::from_fn(n, n, |i, j| {
            if i == order[j] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        return Ok(EigenSystem { values, vectors });
    }
    let herm = hermitian_part(m);
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, EIGEN_ITER_PER_DIM * n.max(1))
        .ok_or(Error::EigenNoConvergence { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (j, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        canonicalize_phase(&mut col);
        vectors.set_column(j, &col);
    }
    Ok(EigenSystem { values, vectors })
}

/// Eigenvalues only, unordered.
pub(crate) fn eigvalsh_mat(m: &CMat) -> Vec<f64> {
    if is_diagonal(m) {
        return (0..m.nrows()).map(|i| m[(i, i)].re).collect();
    }
    hermitian_part(m).symmetric_eigenvalues().iter().copied().collect()
}

fn canonicalize_phase(col: &mut CVec) {
    let max = col.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    // first component within roundoff of the maximum magnitude
    let pivot = col.iter().position(|z| z.norm() >= max * (1.0 - 1e-10)).unwrap_or(0);
    let z = col[pivot];
    let phase = z.conj() / z.norm();
    col.iter_mut().for_each(|c| *c *= phase);
}

/// Applies `f` to the spectrum of `h`. With `support_only`, eigenvalues at or
/// below the support threshold map to zero and `f` is never called on them.
pub fn matrix_function<F>(h: &HermitianMatrix, f: F, support_only: bool) -> Result<HermitianMatrix>
where
    F: Fn(f64) -> f64,
{
    let eig = eigh(h)?;
    spectral_apply(&eig, f, support_only).map(HermitianMatrix::hermitize)
}

pub(crate) fn spectral_apply<F>(eig: &EigenSystem, f: F, support_only: bool) -> Result<CMat>
where
    F: Fn(f64) -> f64,
{
    let thr = eig.support_threshold();
    let mut vals = Vec::with_capacity(eig.dim());
    for &lam in &eig.values {
        if support_only && lam <= thr {
            vals.push(0.0);
            continue;
        }
        let v = f(lam);
        if !v.is_finite() {
            return Err(Error::Domain { eigenvalue: lam });
        }
        vals.push(v);
    }
    Ok(eig.reconstruct_with(&vals))
}

/// Clips roundoff-level negative eigenvalues per the PSD repair policy.
/// Returns the repaired eigenvalues or an error for genuine violations.
pub(crate) fn psd_repair_values(values: &[f64]) -> Result<Vec<f64>> {
    let lmax = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = -PSD_CLIP_REL * lmax.max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        if v < 0.0 {
            if v < floor {
                return Err(Error::NotPsd { min_eigenvalue: v });
            }
            out.push(0.0);
        } else {
            out.push(v);
        }
    }
    Ok(out)
}

/// Unitary `U` with `T U` Hermitian positive semidefinite (polar decomposition).
pub fn polar_unitary(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = t.as_mat();
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    let svd = svd(m)?;
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > SUPPORT_REL * smax).count();
    if rank < n {
        return Err(Error::RankDeficient { rank, dim: n });
    }
    let w = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let u = v_t.adjoint() * w.adjoint();
    let tu = m * &u;
    let defect = (&tu - tu.adjoint()).norm();
    if defect > 1e-10 * (1.0 + tu.norm()) {
        return Err(Error::NotHermitian { defect });
    }
    ComplexMatrix::new(u)
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    trace_norm_mat(m.as_mat())
}

pub(crate) fn trace_norm_mat(m: &CMat) -> Result<f64> {
    if m.nrows() == m.ncols() && hermitian_defect(m) <= HERMITIAN_REL * max_abs(m) {
        // Hermitian shortcut: singular values are |eigenvalues|
        return Ok(eigvalsh_mat(m).iter().map(|v| v.abs()).sum());
    }
    Ok(svd(m)?.singular_values.iter().sum())
}

/// Hermitian `L` with `B L = A`, following the compact-SVD construction.
pub fn hermitian_factor_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<HermitianMatrix> {
    let a = a.as_mat();
    let b = b.as_mat();
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::InvalidShape(format!(
            "A is {}x{} but B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let dp = b.ncols();
    let a_norm = a.norm();
    let ab = a * b.adjoint();
    let herm_res = (&ab - ab.adjoint()).norm();
    if herm_res > 1e-9 * (1.0 + a_norm * b.norm()) {
        return Err(Error::FactorCondition {
            condition: "A B^dagger is not Hermitian",
            residual: herm_res,
        });
    }

    let svd = svd(b)?;
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > SUPPORT_REL * smax)
        .collect();
    let u_full = svd.u.as_ref().expect("u requested");
    let vt_full = svd.v_t.as_ref().expect("v_t requested");
    let u = columns(u_full, &keep);
    let v = rows(vt_full, &keep);
    let x_inv = CMat::from_fn(keep.len(), keep.len(), |i, j| {
        if i == j {
            C64::new(1.0 / svd.singular_values[keep[i]], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });

    let image_res = (a - &u * (u.adjoint() * a)).norm();
    if image_res > 1e-9 * (1.0 + a_norm) {
        return Err(Error::FactorCondition {
            condition: "Im A is not contained in Im B",
            residual: image_res,
        });
    }

    // complement of the row space of B
    let row_proj = v.adjoint() * &v;
    let comp = CMat::identity(dp, dp) - &row_proj;
    let comp_eig = eigh_mat(&comp)?;
    let comp_idx: Vec<usize> = (0..dp).filter(|&k| comp_eig.values[k] > 0.5).collect();
    let v_tilde = columns(&comp_eig.vectors, &comp_idx).adjoint();

    // least-squares C with A = B C
    let b_pinv = v.adjoint() * &x_inv * u.adjoint();
    let c = &b_pinv * a;

    let core = v.adjoint() * &x_inv * u.adjoint() * &ab * &u * &x_inv * &v;
    let vt_proj = v_tilde.adjoint() * &v_tilde;
    let cross = &vt_proj * c.adjoint() * &row_proj;
    let l = core + &cross + cross.adjoint();

    let residual = (b * &l - a).norm();
    if residual > 1e-9 * (1.0 + a_norm) {
        return Err(Error::FactorCondition {
            condition: "B L = A residual",
            residual,
        });
    }
    Ok(HermitianMatrix::hermitize(l))
}

pub(crate) fn svd(m: &CMat) -> Result<SVD<C64, nalgebra::Dyn, nalgebra::Dyn>> {
    // a bare machine epsilon can stall the bidiagonal sweep on rank-deficient
    // input, and the complex sweep occasionally returns an inaccurate
    // factorization at tight epsilon; every attempt is verified, retrying on
    // the adjoint and then at a looser epsilon
    for eps in [SVD_EPS_FACTOR * f64::EPSILON, 1e-14] {
        for adjoint in [false, true] {
            let input = if adjoint { m.adjoint() } else { m.clone() };
            let Some(d) = SVD::try_new(input, true, true, eps, 0) else {
                continue;
            };
            let d = if adjoint {
                SVD {
                    u: d.v_t.map(|v| v.adjoint()),
                    v_t: d.u.map(|u| u.adjoint()),
                    singular_values: d.singular_values,
                }
            } else {
                d
            };
            if let Ok(back) = d.clone().recompose() {
                if (back - m).norm() <= 1e-10 * (1.0 + m.norm()) {
                    return Ok(d);
                }
            }
        }
    }
    Err(Error::SvdNoConvergence {
        rows: m.nrows(),
        cols: m.ncols(),
    })
}

pub(crate) fn reconstruct(vectors: &CMat, vals: &[f64]) -> CMat {
    let mut scaled = vectors.clone();
    for (j, &v) in vals.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    hermitian_part(&(scaled * vectors.adjoint()))
}

pub(crate) fn columns(m: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

fn rows(m: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(idx.len(), m.ncols(), |i, j| m[(idx[i], j)])
}

pub(crate) fn hermitian_part(m: &CMat) -> CMat {
    let n = m.nrows();
    CMat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

pub(crate) fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut d = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn is_diagonal(m: &CMat) -> bool {
    let n = m.nrows();
    if n != m.ncols() {
        return false;
    }
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != C64::new(0.0, 0.0) {
                return false;
            }
        }
    }
    // diagonal of a Hermitian matrix must be real
    (0..n).all(|i| m[(i, i)].im == 0.0)
}

/// Real trace of `a b` without forming the product.
pub(crate) fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn mat(rows: &[&[C64]]) -> CMat {
        CMat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn svd_recovers_from_inaccurate_sweep() {
        // column-major; the complex sweep at 5 eps returns a factorization
        // off by 5e-3 on this matrix
        let d = [
            (15.517124970313718, 2.499384809591051e-16),
            (-0.22527931543668514, -0.5151784928080255),
            (0.20071900877860321, 0.07374223723659573),
            (-0.024237896774467513, 0.040379954377023866),
            (-1.8594169888348053, 4.252195280124498),
            (0.566608767385916, 1.7209603150484176e-16),
            (-0.10308613807118847, -0.1407352404076257),
            (-0.05268348746149265, -0.13954704781631908),
            (2.4154563881252042, -0.8874154923924383),
            (-0.15029879197844104, 0.20519089198447055),
            (0.7876801148753275, -4.562117289558114e-16),
            (-0.11132534611681227, 0.12658976286778392),
            (-0.44604412718991177, -0.743102492500194),
            (-0.11746322846692545, 0.3111344284395385),
            (-0.17024181907817873, -0.19358459020350843),
            (0.5410703580919479, 3.417721649186461e-17),
        ];
        let m = CMat::from_iterator(4, 4, d.iter().map(|&(a, b)| C64::new(a, b)));
        let s = svd(&m).unwrap();
        assert!((s.recompose().unwrap() - &m).norm() < 1e-12);
        let u = polar_unitary(&ComplexMatrix::new(m.clone()).unwrap()).unwrap();
        let prod = &m * u.as_mat();
        assert!(eigvalsh_mat(&hermitian_part(&prod)).iter().all(|&v| v > 0.0));
    }

    #[test]
    fn eigh_identity() {
        let e = eigh(&HermitianMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
    }

    #[test]
    fn eigh_diagonal_standard_basis() {
        let h = HermitianMatrix::from_real_diagonal(&[0.75, 0.25]);
        let e = eigh(&h).unwrap();
        assert_eq!(e.values, vec![0.25, 0.75]);
        assert_eq!(e.vectors[(1, 0)], c(1.0));
        assert_eq!(e.vectors[(0, 1)], c(1.0));
    }

    #[test]
    fn eigh_two_by_two_closed_form() {
        // characteristic polynomial x^2 - x = 0
        let h = HermitianMatrix::new(mat(&[&[c(0.5), c(0.5)], &[c(0.5), c(0.5)]])).unwrap();
        let e = eigh(&h).unwrap();
        assert_abs_diff_eq!(e.values[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigh_is_deterministic() {
        let h = HermitianMatrix::new(mat(&[&[c(1.0), C64::new(0.2, 0.3)], &[C64::new(0.2, -0.3), c(-0.4)]])).unwrap();
        let a = eigh(&h).unwrap();
        let b = eigh(&h).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = mat(&[&[c(1.0), c(2.0)], &[c(0.0), c(1.0)]]);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_of_diagonal() {
        let h = HermitianMatrix::from_real_diagonal(&[4.0, 9.0]);
        let r = matrix_function(&h, f64::sqrt, false).unwrap();
        assert_abs_diff_eq!(r.as_mat()[(0, 0)].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.as_mat()[(1, 1)].re, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn pseudo_inverse_on_support() {
        let h = HermitianMatrix::from_real_diagonal(&[0.5, 0.0]);
        let r = matrix_function(&h, |x| 1.0 / x, true).unwrap();
        assert_abs_diff_eq!(r.as_mat()[(0, 0)].re, 2.0, epsilon = 1e-14);
        assert_eq!(r.as_mat()[(1, 1)], c(0.0));
    }

    #[test]
    fn log_outside_domain_is_reported() {
        let h = HermitianMatrix::from_real_diagonal(&[0.5, 0.0]);
        let err = matrix_function(&h, f64::ln, false).unwrap_err();
        assert_eq!(err, Error::Domain { eigenvalue: 0.0 });
    }

    #[test]
    fn log_of_regularized_projector() {
        // oracle: eigenvalues 0 and 1 of [[.5,.5],[.5,.5]] shifted by delta,
        // eigenvectors (1,-1)/sqrt2 and (1,1)/sqrt2
        let delta = 1e-3;
        let h = HermitianMatrix::new(mat(&[&[c(0.5 + delta), c(0.5)], &[c(0.5), c(0.5 + delta)]])).unwrap();
        let l = matrix_function(&h, f64::ln, false).unwrap();
        let (l0, l1) = ((delta).ln(), (1.0 + delta).ln());
        assert_abs_diff_eq!(l.as_mat()[(0, 0)].re, 0.5 * (l0 + l1), epsilon = 1e-12);
        assert_abs_diff_eq!(l.as_mat()[(0, 1)].re, 0.5 * (l1 - l0), epsilon = 1e-12);
    }

    #[test]
    fn polar_of_psd_is_identity() {
        let t = ComplexMatrix::new(mat(&[&[c(2.0), c(0.5)], &[c(0.5), c(1.0)]])).unwrap();
        let u = polar_unitary(&t).unwrap();
        let diff = u.as_mat() - CMat::identity(2, 2);
        assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn polar_sign_flip() {
        let t = ComplexMatrix::new(mat(&[&[c(-1.0), c(0.0)], &[c(0.0), c(1.0)]])).unwrap();
        let u = polar_unitary(&t).unwrap();
        assert_abs_diff_eq!(u.as_mat()[(0, 0)].re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u.as_mat()[(1, 1)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn polar_rejects_rank_deficient() {
        let t = ComplexMatrix::new(mat(&[&[c(1.0), c(1.0)], &[c(1.0), c(1.0)]])).unwrap();
        assert!(matches!(
            polar_unitary(&t),
            Err(Error::RankDeficient { rank: 1, dim: 2 })
        ));
    }

    #[test]
    fn trace_norm_of_diagonal() {
        let m = ComplexMatrix::new(mat(&[&[c(0.3), c(0.0)], &[c(0.0), c(-0.7)]])).unwrap();
        assert_abs_diff_eq!(trace_norm(&m).unwrap(), 1.0, epsilon = 1e-14);
        let z = ComplexMatrix::new(CMat::zeros(3, 3)).unwrap();
        assert_eq!(trace_norm(&z).unwrap(), 0.0);
    }

    #[test]
    fn factor_solve_identity_and_scaling() {
        let b = ComplexMatrix::new(mat(&[&[c(1.0), C64::new(0.3, 0.1)], &[c(0.2), c(2.0)]])).unwrap();
        let l = hermitian_factor_solve(&b, &b).unwrap();
        assert!((l.as_mat() - CMat::identity(2, 2)).norm() < 1e-10);
        let a2 = ComplexMatrix::new(b.as_mat() * c(2.0)).unwrap();
        let l2 = hermitian_factor_solve(&a2, &b).unwrap();
        assert!((l2.as_mat() - CMat::identity(2, 2) * c(2.0)).norm() < 1e-10);
    }

    #[test]
    fn factor_solve_reports_which_condition_failed() {
        let b = ComplexMatrix::new(mat(&[&[c(1.0), c(0.0)], &[c(0.0), c(0.0)]])).unwrap();
        let a = ComplexMatrix::new(mat(&[&[c(0.0), c(0.0)], &[c(1.0), c(0.0)]])).unwrap();
        // A B^dagger = [[0,0],[1,0]] is not Hermitian
        match hermitian_factor_solve(&a, &b) {
            Err(Error::FactorCondition { condition, .. }) => assert!(condition.contains("Hermitian")),
            other => panic!("unexpected {other:?}"),
        }
        let a = ComplexMatrix::new(mat(&[&[c(0.0), c(0.0)], &[c(0.0), c(1.0)]])).unwrap();
        match hermitian_factor_solve(&a, &b) {
            Err(Error::FactorCondition { condition, .. }) => assert!(condition.contains("Im A")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn psd_repair_policy() {
        assert_eq!(psd_repair_values(&[-1e-13, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert!(psd_repair_values(&[-1e-6, 1.0]).is_err());
    }
}
