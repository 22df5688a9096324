//! Classical Fisher information, SLD/RLD operators and the Petz family of
//! monotone metrics.
//!
//! A Petz metric is fixed by an operator monotone `f` with `f(1) = 1`. In the
//! eigenbasis of `rho` it reads
//! `g(X, Y) = sum_jk conj(X_jk) Y_jk / m(l_j, l_k)` with `m(a, b) = b f(a / b)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{
    eigh_mat, hermitian_defect, max_abs, spectral_apply, trace_product, CMat, ComplexMatrix, HermitianMatrix, C64,
};
use crate::objects::{check_dims, measure, ClassicalDistribution, DensityMatrix, Measurement, TangentDirection};
use crate::quadrature::{integrate_adaptive, Estimate, DOUBLING_TOL, NODE_CAP};

/// Below this `|z|`, `expm1(z) / z` is replaced by its series.
const SERIES_CUTOFF: f64 = 1e-5;

/// `(e^z - 1) / z`, exact at `z = 0`.
fn expm1_ratio(z: f64) -> f64 {
    if z.abs() < SERIES_CUTOFF {
        1.0 + z / 2.0 + z * z / 6.0
    } else {
        z.exp_m1() / z
    }
}

/// The `f_alpha` family normalized to `f(1) = 1`.
///
/// With `l = ln x` and `b1, b2 = (1 -+ alpha)/2`,
/// `f(x) = g(l)^2 / (g(b1 l) g(b2 l))` where `g(z) = (e^z - 1)/z`, which is
/// the unnormalized form divided by its value `(4 - a^2)/(1 - a^2)` at `x = 1`.
pub fn f_alpha(x: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain { eigenvalue: x });
    }
    let l = x.ln();
    let b1 = 0.5 * (1.0 - alpha);
    let b2 = 0.5 * (1.0 + alpha);
    let g = expm1_ratio(l);
    Ok(g * g / (expm1_ratio(b1 * l) * expm1_ratio(b2 * l)))
}

/// `(1 - a^2/4)(x - 1)^2 / ((x^b1 - 1)(x^b2 - 1))` without normalization; its
/// value at `x = 1` is `(4 - a^2)/(1 - a^2)`, undefined at `alpha = +-1`.
pub fn f_alpha_unnormalized(x: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if (alpha.abs() - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let scale = (4.0 - alpha * alpha) / (1.0 - alpha * alpha);
    Ok(scale * f_alpha(x, alpha)?)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha.abs() > 3.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

#[derive(Clone)]
pub enum MetricKind {
    Sld,
    Rld,
    Bkm,
    Wy,
    Alpha(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Sld => write!(f, "Sld"),
            MetricKind::Rld => write!(f, "Rld"),
            MetricKind::Bkm => write!(f, "Bkm"),
            MetricKind::Wy => write!(f, "Wy"),
            MetricKind::Alpha(a) => write!(f, "Alpha({a})"),
            MetricKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// An operator monotone function with `f(1) = 1` and `f(x) = x f(1/x)`.
#[derive(Debug, Clone)]
pub struct MonotoneMetricSpec {
    kind: MetricKind,
}

impl MonotoneMetricSpec {
    pub fn sld() -> Self {
        Self { kind: MetricKind::Sld }
    }

    pub fn rld() -> Self {
        Self { kind: MetricKind::Rld }
    }

    pub fn bkm() -> Self {
        Self { kind: MetricKind::Bkm }
    }

    pub fn wy() -> Self {
        Self { kind: MetricKind::Wy }
    }

    pub fn alpha(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            kind: MetricKind::Alpha(alpha),
        })
    }

    /// Checks `f(1) = 1` and the symmetry `f(x) = x f(1/x)` on a grid.
    /// Operator monotonicity itself is the caller's responsibility.
    pub fn custom<F>(f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let at_one = f(1.0);
        if (at_one - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidMetric(format!("f(1) = {at_one}, expected 1")));
        }
        for k in -20..=20 {
            let x = 1.5_f64.powi(k);
            let (a, b) = (f(x), x * f(1.0 / x));
            if !a.is_finite() || a <= 0.0 || (a - b).abs() > 1e-10 * a.max(1.0) {
                return Err(Error::InvalidMetric(format!("f({x}) = {a} but x f(1/x) = {b}")));
            }
        }
        Ok(Self {
            kind: MetricKind::Custom(Arc::new(f)),
        })
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    /// The four named metrics in the order SLD, WY, BKM, RLD.
    pub fn named() -> [Self; 4] {
        [Self::sld(), Self::wy(), Self::bkm(), Self::rld()]
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Domain { eigenvalue: x });
        }
        Ok(match &self.kind {
            MetricKind::Sld => 0.5 * (x + 1.0),
            MetricKind::Rld => 2.0 * x / (x + 1.0),
            MetricKind::Bkm => expm1_ratio(x.ln()),
            MetricKind::Wy => {
                let h = 0.5 * (x.sqrt() + 1.0);
                h * h
            }
            MetricKind::Alpha(a) => f_alpha(x, *a)?,
            MetricKind::Custom(f) => f(x),
        })
    }

    /// Operator mean `m(a, b) = b f(a / b)`; the metric kernel is `1 / m`.
    pub fn mean(&self, a: f64, b: f64) -> Result<f64> {
        Ok(match &self.kind {
            MetricKind::Sld => 0.5 * (a + b),
            MetricKind::Rld => 2.0 * a * b / (a + b),
            MetricKind::Wy => {
                let h = 0.5 * (a.sqrt() + b.sqrt());
                h * h
            }
            _ => b * self.f(a / b)?,
        })
    }
}

impl fmt::Display for MonotoneMetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MetricKind::Sld => write!(f, "sld"),
            MetricKind::Rld => write!(f, "rld"),
            MetricKind::Bkm => write!(f, "bkm"),
            MetricKind::Wy => write!(f, "wy"),
            MetricKind::Alpha(a) => write!(f, "alpha={a}"),
            MetricKind::Custom(_) => write!(f, "custom"),
        }
    }
}

impl FromStr for MonotoneMetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sld" => Ok(Self::sld()),
            "rld" => Ok(Self::rld()),
            "bkm" => Ok(Self::bkm()),
            "wy" => Ok(Self::wy()),
            other => {
                let a = other
                    .strip_prefix("alpha=")
                    .ok_or_else(|| Error::InvalidMetric(format!("unknown metric '{s}'")))?;
                let a: f64 = a
                    .parse()
                    .map_err(|_| Error::InvalidMetric(format!("bad alpha in '{s}'")))?;
                Self::alpha(a)
            }
        }
    }
}

/// Complex Hermitian `m x m` information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    entries: CMat,
}

impl FisherMatrix {
    pub fn new(entries: CMat) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        let defect = hermitian_defect(&entries);
        if defect > 1e-10 * (1.0 + max_abs(&entries)) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self {
            entries: crate::linalg::hermitian_part(&entries),
        })
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn re(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.re)
    }

    pub fn im(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.im)
    }

    /// The single entry of a one-parameter matrix.
    pub fn scalar(&self) -> Option<f64> {
        (self.m() == 1).then(|| self.entries[(0, 0)].re)
    }
}

/// `J_ij = sum_x dp_i(x) dp_j(x) / p(x)`.
pub fn classical_fisher(p: &ClassicalDistribution, dps: &[Vec<f64>]) -> Result<FisherMatrix> {
    let n = p.len();
    for dp in dps {
        check_dims(n, dp.len())?;
        let sum: f64 = dp.iter().sum();
        let scale = dp.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if sum.abs() > 1e-9 * scale {
            return Err(Error::InvalidDistribution(format!(
                "tangent entries sum to {sum:.3e}, expected 0"
            )));
        }
    }
    for x in 0..n {
        if p.probs()[x] == 0.0 && dps.iter().any(|dp| dp[x].abs() > 1e-12) {
            return Err(Error::InfiniteFisher { index: x });
        }
    }
    let m = dps.len();
    let entries = CMat::from_fn(m, m, |i, j| {
        let s: f64 = (0..n)
            .filter(|&x| p.probs()[x] > 0.0)
            .map(|x| dps[i][x] * dps[j][x] / p.probs()[x])
            .sum();
        C64::new(s, 0.0)
    });
    FisherMatrix::new(entries)
}

/// `X` expressed in the eigenbasis of `rho`.
fn in_eigenbasis(rho: &DensityMatrix, x: &CMat) -> Result<CMat> {
    let e = &rho.eigen()?.vectors;
    Ok(e.adjoint() * x * e)
}

/// SLD with the zero-fill convention, and the residual
/// `||(L rho + rho L)/2 - X||_F`.
pub fn sld_operator(rho: &DensityMatrix, x: &TangentDirection) -> Result<(HermitianMatrix, f64)> {
    check_dims(rho.dim(), x.dim())?;
    let eig = rho.eigen()?;
    let thr = eig.support_threshold();
    let xe = in_eigenbasis(rho, x.as_mat())?;
    let lam = &eig.values;
    let d = rho.dim();
    let le = CMat::from_fn(d, d, |j, k| {
        let s = lam[j] + lam[k];
        if s > thr {
            xe[(j, k)] * (2.0 / s)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let l = &eig.vectors * le * eig.vectors.adjoint();
    let l = HermitianMatrix::hermitize(l);
    let r = rho.as_mat();
    let residual = ((l.as_mat() * r + r * l.as_mat()) * C64::new(0.5, 0.0) - x.as_mat()).norm();
    Ok((l, residual))
}

/// RLD `L = X rho^+`, which exists iff `supp X` lies in `supp rho`.
pub fn rld_operator(rho: &DensityMatrix, x: &TangentDirection) -> Result<ComplexMatrix> {
    check_dims(rho.dim(), x.dim())?;
    let eig = rho.eigen()?;
    let d = rho.dim();
    let comp = CMat::identity(d, d) - eig.support_projector();
    let outside = (&comp * x.as_mat()).norm();
    if outside > 1e-10 {
        return Err(Error::RldNonexistent { residual: outside });
    }
    let pinv = spectral_apply(eig, |v| 1.0 / v, true)?;
    let l = x.as_mat() * pinv;
    let residual = (&l * rho.as_mat() - x.as_mat()).norm();
    if residual > 1e-10 * (1.0 + x.as_mat().norm()) {
        return Err(Error::RldNonexistent { residual });
    }
    ComplexMatrix::new(l)
}

fn require_full_rank(rho: &DensityMatrix) -> Result<()> {
    let rank = rho.rank()?;
    if rank < rho.dim() {
        return Err(Error::RankDeficient { rank, dim: rho.dim() });
    }
    Ok(())
}

/// `g_rho(X, Y)` for a full-rank `rho`.
pub fn petz_metric(
    spec: &MonotoneMetricSpec,
    rho: &DensityMatrix,
    x: &TangentDirection,
    y: &TangentDirection,
) -> Result<C64> {
    check_dims(rho.dim(), x.dim())?;
    check_dims(rho.dim(), y.dim())?;
    require_full_rank(rho)?;
    let lam = &rho.eigen()?.values;
    let xe = in_eigenbasis(rho, x.as_mat())?;
    let ye = if x == y {
        xe.clone()
    } else {
        in_eigenbasis(rho, y.as_mat())?
    };
    let d = rho.dim();
    let mut s = C64::new(0.0, 0.0);
    for j in 0..d {
        for k in 0..d {
            let m = spec.mean(lam[j], lam[k])?;
            s += xe[(j, k)].conj() * ye[(j, k)] / m;
        }
    }
    Ok(s)
}

/// Real scalar `g_rho(X, X)`.
pub fn metric_value(spec: &MonotoneMetricSpec, rho: &DensityMatrix, x: &TangentDirection) -> Result<f64> {
    Ok(petz_metric(spec, rho, x, x)?.re)
}

/// Projective measurement in the SLD eigenbasis, and the classical Fisher
/// information it achieves.
pub fn sld_optimal_measurement(rho: &DensityMatrix, x: &TangentDirection) -> Result<(Measurement, f64)> {
    require_full_rank(rho)?;
    let (l, _) = sld_operator(rho, x)?;
    let basis = eigh_mat(l.as_mat())?.vectors;
    let m = Measurement::projective(&basis)?;
    let p = measure(&m, rho)?;
    let dp = m.push_tangent(x)?;
    // exact zeros only arise from roundoff in the tangent sum
    let mean = dp.iter().sum::<f64>() / dp.len() as f64;
    let dp: Vec<f64> = dp.iter().map(|v| v - mean).collect();
    let achieved = classical_fisher(&p, &[dp])?.scalar().expect("one parameter");
    Ok((m, achieved))
}

/// `J_ij = Tr rho L_j^dagger L_i` with `L_i = X_i rho^+`.
pub fn rld_matrix(rho: &DensityMatrix, tangents: &[TangentDirection]) -> Result<FisherMatrix> {
    let ls = tangents
        .iter()
        .map(|x| rld_operator(rho, x))
        .collect::<Result<Vec<_>>>()?;
    let m = ls.len();
    let r = rho.as_mat();
    let entries = CMat::from_fn(m, m, |i, j| {
        let prod = r * ls[j].as_mat().adjoint();
        trace_product(&prod, ls[i].as_mat())
    });
    FisherMatrix::new(entries)
}

fn real_sym_sqrt(g: &DMatrix<f64>, inverse: bool) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::try_new(g.clone(), f64::EPSILON, 1000 * g.nrows().max(1))
        .ok_or(Error::EigenNoConvergence { dim: g.nrows() })?;
    let lmax = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if inverse {
            if *v <= 1e-12 * lmax {
                return Err(Error::RankDeficient {
                    rank: 0,
                    dim: g.nrows(),
                });
            }
            *v = 1.0 / v.sqrt();
        } else {
            *v = v.max(0.0).sqrt();
        }
    }
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&vals) * q.transpose())
}

fn check_weight(g: &DMatrix<f64>, m: usize) -> Result<()> {
    if g.nrows() != m || g.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: g.nrows(),
        });
    }
    let scale = g.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let defect = (g - g.transpose()).amax();
    if defect > 1e-12 * scale.max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let eig = SymmetricEigen::new(g.clone());
    let min = eig.eigenvalues.min();
    if min < -1e-12 * scale {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(())
}

/// `Tr G Re J + ||sqrt(G) Im J sqrt(G)||_1`, the minimum of `Tr G J'` over
/// real symmetric `J' >= J`.
pub fn holevo_rld_bound(g: &DMatrix<f64>, j: &FisherMatrix) -> Result<f64> {
    check_weight(g, j.m())?;
    let sg = real_sym_sqrt(g, false)?;
    let k = &sg * j.im() * &sg;
    let ik = k.map(|v| C64::new(0.0, v));
    let norm: f64 = eigh_mat(&ik)?.values.iter().map(|v| v.abs()).sum();
    Ok((g * j.re()).trace() + norm)
}

/// The real symmetric matrix attaining [`holevo_rld_bound`]:
/// `Re J + G^-1/2 |K| G^-1/2` with `K = sqrt(G) Im J sqrt(G)`.
pub fn holevo_rld_minimizer(g: &DMatrix<f64>, j: &FisherMatrix) -> Result<DMatrix<f64>> {
    check_weight(g, j.m())?;
    let sg = real_sym_sqrt(g, false)?;
    let sg_inv = real_sym_sqrt(g, true)?;
    let k = &sg * j.im() * &sg;
    let abs_k = real_sym_sqrt(&(k.transpose() * &k), false)?;
    let out = j.re() + &sg_inv * abs_k * &sg_inv;
    Ok((&out + out.transpose()) * 0.5)
}

/// `int_0^1 (1 - s) g_{rho_s}(rho - sigma, rho - sigma) ds` along
/// `rho_s = s rho + (1 - s) sigma`, starting from `nodes` Gauss–Legendre
/// nodes and doubling until successive estimates agree to 1e-8.
pub fn integral_divergence(
    spec: &MonotoneMetricSpec,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    nodes: usize,
) -> Result<Estimate> {
    check_dims(rho.dim(), sigma.dim())?;
    if nodes < 2 {
        return Err(Error::TooFewNodes(nodes));
    }
    require_full_rank(rho)?;
    require_full_rank(sigma)?;
    let delta = TangentDirection::between(rho, sigma)?;
    let f = |s: f64| -> Result<f64> {
        let rs = rho.mix(sigma, s)?;
        Ok((1.0 - s) * metric_value(spec, &rs, &delta)?)
    };
    integrate_adaptive(&f, nodes, DOUBLING_TOL, NODE_CAP)
}

/// The iterated form `int_0^1 int_0^t g_{rho_s} ds dt` by tensor-product
/// Gauss–Legendre, used to cross-check [`integral_divergence`].
pub fn integral_divergence_iterated(
    spec: &MonotoneMetricSpec,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    nodes: usize,
) -> Result<f64> {
    check_dims(rho.dim(), sigma.dim())?;
    require_full_rank(rho)?;
    require_full_rank(sigma)?;
    let delta = TangentDirection::between(rho, sigma)?;
    let (xs, ws) = crate::quadrature::gauss_legendre(nodes)?;
    let mut outer = Vec::with_capacity(nodes);
    for (&t, &wt) in xs.iter().zip(&ws) {
        let mut inner = Vec::with_capacity(nodes);
        for (&u, &wu) in xs.iter().zip(&ws) {
            let s = t * u;
            inner.push(wu * t * metric_value(spec, &rho.mix(sigma, s)?, &delta)?);
        }
        outer.push(wt * crate::quadrature::pairwise_sum(&inner));
    }
    Ok(crate::quadrature::pairwise_sum(&outer))
}
