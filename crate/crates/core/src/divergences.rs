//! Scalar divergences on classical and quantum pairs.
//!
//! Infinite values are carried by [`DivValue`] and never enter float
//! arithmetic.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{columns, eigh_mat, hermitian_part, spectral_apply, trace_norm_mat, CMat, C64};
use crate::objects::{check_dims, ClassicalDistribution, DensityMatrix, Measurement};
use crate::random::{ginibre, random_unitary, rng};

/// Frobenius residual tolerated by the support-containment test.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Trace norms below this count as exactly zero overlap.
const ZERO_OVERLAP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DivValue {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

impl DivValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            DivValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, DivValue::Finite(_))
    }

    /// Finite value, or an error for either infinity.
    pub fn expect_finite(self) -> Result<f64> {
        self.finite().ok_or(Error::NonFinite)
    }

    /// `self <= other + slack` in the extended reals.
    pub fn le_with_slack(self, other: DivValue, slack: f64) -> bool {
        match (self, other) {
            (DivValue::NegInfinity, _) | (_, DivValue::PosInfinity) => true,
            (DivValue::PosInfinity, _) | (_, DivValue::NegInfinity) => false,
            (DivValue::Finite(a), DivValue::Finite(b)) => a <= b + slack,
        }
    }
}

impl fmt::Display for DivValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivValue::Finite(v) => write!(f, "{v}"),
            DivValue::PosInfinity => write!(f, "+inf"),
            DivValue::NegInfinity => write!(f, "-inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportCondition {
    Contained,
    Equal,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub value: DivValue,
    pub support_condition: SupportCondition,
    pub notes: Vec<String>,
}

impl DivergenceReport {
    fn finite(value: f64, support_condition: SupportCondition) -> Self {
        Self {
            value: DivValue::Finite(value),
            support_condition,
            notes: Vec::new(),
        }
    }

    fn violated(residual: f64) -> Self {
        Self {
            value: DivValue::PosInfinity,
            support_condition: SupportCondition::Violated,
            notes: vec![format!(
                "supp rho not contained in supp sigma (residual {residual:.3e})"
            )],
        }
    }

    /// Finite value or an error.
    pub fn expect_finite(&self) -> Result<f64> {
        self.value.expect_finite()
    }
}

/// Classifies `supp rho` against `supp sigma`, returning the containment
/// residual `||(I - P_sigma) rho (I - P_sigma)||_F`.
pub fn support_condition(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(SupportCondition, f64)> {
    check_dims(rho.dim(), sigma.dim())?;
    let d = rho.dim();
    let es = sigma.eigen()?;
    let er = rho.eigen()?;
    let comp = CMat::identity(d, d) - es.support_projector();
    let residual = (&comp * rho.as_mat() * &comp).norm();
    if residual > SUPPORT_TOL {
        return Ok((SupportCondition::Violated, residual));
    }
    let equal =
        er.rank() == es.rank() && (er.support_projector() - es.support_projector()).norm() <= SUPPORT_TOL.sqrt();
    let cond = if equal {
        SupportCondition::Equal
    } else {
        SupportCondition::Contained
    };
    Ok((cond, residual))
}

/// Kullback–Leibler divergence with `0 ln 0 = 0`.
pub fn kl(p: &ClassicalDistribution, q: &ClassicalDistribution) -> Result<DivValue> {
    check_dims(p.len(), q.len())?;
    let mut s = 0.0;
    for (&a, &b) in p.probs().iter().zip(q.probs()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(DivValue::PosInfinity);
        }
        s += a * (a.ln() - b.ln());
    }
    Ok(DivValue::Finite(s))
}

/// Umegaki relative entropy `tr rho (ln rho - ln sigma)`.
pub fn umegaki(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceReport> {
    let (cond, residual) = support_condition(rho, sigma)?;
    if cond == SupportCondition::Violated {
        return Ok(DivergenceReport::violated(residual));
    }
    let er = rho.eigen()?;
    let es = sigma.eigen()?;
    let entropy_term: f64 = er
        .support_indices()
        .iter()
        .map(|&k| er.values[k] * er.values[k].ln())
        .sum();
    // tr rho ln sigma = sum_k ln(mu_k) <v_k|rho|v_k> over supp sigma
    let mut cross = 0.0;
    for k in es.support_indices() {
        let v = es.vectors.column(k);
        let w = (v.adjoint() * rho.as_mat() * v)[(0, 0)].re;
        cross += w * es.values[k].ln();
    }
    Ok(DivergenceReport::finite(entropy_term - cross, cond))
}

/// Moore–Penrose inverse on the support.
fn pinv(rho: &DensityMatrix) -> Result<CMat> {
    spectral_apply(rho.eigen()?, |x| 1.0 / x, true)
}

/// RLD divergence `tr rho ln(sqrt(rho) sigma^+ sqrt(rho))`, the logarithm
/// taken on `supp rho`.
pub fn rld_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceReport> {
    let (cond, residual) = support_condition(rho, sigma)?;
    if cond == SupportCondition::Violated {
        return Ok(DivergenceReport::violated(residual));
    }
    let er = rho.eigen()?;
    let idx = er.support_indices();
    let basis = columns(&er.vectors, &idx);
    let roots: Vec<f64> = idx.iter().map(|&k| er.values[k].sqrt()).collect();
    let inner = basis.adjoint() * pinv(sigma)? * &basis;
    let r = idx.len();
    let m = CMat::from_fn(r, r, |i, j| inner[(i, j)] * (roots[i] * roots[j]));
    let em = eigh_mat(&hermitian_part(&m))?;
    let log_m = spectral_apply(&em, f64::ln, false)?;
    // rho is diag(lambda) in this basis
    let value: f64 = (0..r).map(|i| roots[i] * roots[i] * log_m[(i, i)].re).sum();
    Ok(DivergenceReport::finite(value, cond))
}

/// `ln ||sqrt(rho) sqrt(sigma)||_1` as written (non-positive).
pub fn fidelity_logdiv(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivValue> {
    check_dims(rho.dim(), sigma.dim())?;
    let prod = rho.sqrt_mat()? * sigma.sqrt_mat()?;
    let norm = trace_norm_mat(&prod)?;
    if norm <= ZERO_OVERLAP {
        return Ok(DivValue::NegInfinity);
    }
    Ok(DivValue::Finite(norm.ln()))
}

/// Max-relative entropy `ln lambda_max(sigma^-1/2 rho sigma^-1/2)` on `supp sigma`.
pub fn dmax(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceReport> {
    let (cond, residual) = support_condition(rho, sigma)?;
    if cond == SupportCondition::Violated {
        return Ok(DivergenceReport::violated(residual));
    }
    if rho.is_diagonal() && sigma.is_diagonal() {
        let mut best = f64::NEG_INFINITY;
        let es = sigma.eigen()?;
        let thr = es.support_threshold();
        for i in 0..rho.dim() {
            let s = sigma.as_mat()[(i, i)].re;
            if s > thr {
                best = best.max(rho.as_mat()[(i, i)].re / s);
            }
        }
        return Ok(DivergenceReport::finite(best.ln(), cond));
    }
    let es = sigma.eigen()?;
    let idx = es.support_indices();
    let basis = columns(&es.vectors, &idx);
    let inv_roots: Vec<f64> = idx.iter().map(|&k| 1.0 / es.values[k].sqrt()).collect();
    let inner = basis.adjoint() * rho.as_mat() * &basis;
    let r = idx.len();
    let m = CMat::from_fn(r, r, |i, j| inner[(i, j)] * (inv_roots[i] * inv_roots[j]));
    let em = eigh_mat(&hermitian_part(&m))?;
    let lmax = em.values.last().copied().unwrap_or(0.0);
    Ok(DivergenceReport::finite(lmax.ln(), cond))
}

/// Best `kl(M(rho) || M(sigma))` found over rank-1 projective measurements.
///
/// Seeded search: the eigenbases of `rho`, `sigma` and `ln rho - ln sigma`,
/// then random restarts each followed by local unitary perturbations, until
/// `budget` evaluations are spent. The value is a lower bound only.
pub fn measured_div_lower(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    budget: usize,
    seed: u64,
) -> Result<(DivValue, Measurement)> {
    check_dims(rho.dim(), sigma.dim())?;
    let d = rho.dim();
    let mut search = Search {
        rho: rho.as_mat(),
        sigma: sigma.as_mat(),
        budget: budget.max(1),
        used: 0,
        best: None,
    };

    let mut seeds = vec![rho.eigen()?.vectors.clone(), sigma.eigen()?.vectors.clone()];
    if let Ok(basis) = log_difference_basis(rho, sigma) {
        seeds.push(basis);
    }
    for u in &seeds {
        search.eval(u);
    }

    let mut r = rng(seed);
    // local refinement of the best seeded basis first
    if let Some((_, u)) = search.best.clone() {
        search.refine(u, &mut r, 0.3);
    }
    while search.remaining() > 0 {
        let u = random_unitary(d, r.random())?;
        search.eval(&u);
        search.refine(u, &mut r, 0.5);
    }
    let (value, u) = search.best.expect("at least one evaluation");
    Ok((value, Measurement::projective(&u)?))
}

fn log_difference_basis(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<CMat> {
    if rho.rank()? < rho.dim() || sigma.rank()? < sigma.dim() {
        return Err(Error::RankDeficient {
            rank: rho.rank()?.min(sigma.rank()?),
            dim: rho.dim(),
        });
    }
    let lr = spectral_apply(rho.eigen()?, f64::ln, false)?;
    let ls = spectral_apply(sigma.eigen()?, f64::ln, false)?;
    Ok(eigh_mat(&hermitian_part(&(lr - ls)))?.vectors)
}

struct Search<'a> {
    rho: &'a CMat,
    sigma: &'a CMat,
    budget: usize,
    used: usize,
    best: Option<(DivValue, CMat)>,
}

impl Search<'_> {
    fn remaining(&self) -> usize {
        self.budget - self.used
    }

    /// Evaluates a basis; returns its value if the budget allowed it.
    fn eval(&mut self, u: &CMat) -> Option<DivValue> {
        if self.used >= self.budget {
            return None;
        }
        self.used += 1;
        let v = basis_kl(self.rho, self.sigma, u);
        let better = match &self.best {
            None => true,
            Some((b, _)) => !v.le_with_slack(*b, 0.0),
        };
        if better {
            self.best = Some((v, u.clone()));
        }
        Some(v)
    }

    /// Greedy perturbation `U exp(i eps H)`, halving `eps` after a streak of
    /// rejections.
    fn refine(&mut self, mut u: CMat, r: &mut rand_chacha::ChaCha8Rng, eps0: f64) {
        let d = u.nrows();
        let mut current = basis_kl(self.rho, self.sigma, &u);
        let mut eps = eps0;
        let mut misses = 0;
        while eps > 1e-6 && self.remaining() > 0 {
            let g = ginibre(d, d, r);
            let h = hermitian_part(&g);
            let step = unitary_exp(&h, eps);
            let cand = &u * step;
            let Some(v) = self.eval(&cand) else { break };
            if !v.le_with_slack(current, 0.0) {
                current = v;
                u = cand;
                misses = 0;
            } else {
                misses += 1;
                if misses >= 2 * d {
                    eps *= 0.5;
                    misses = 0;
                }
            }
            // hand the rest of the budget to restarts once converged
            if eps < 1e-4 {
                break;
            }
        }
    }
}

fn unitary_exp(h: &CMat, eps: f64) -> CMat {
    let eig = eigh_mat(h).expect("hermitian part of a finite matrix");
    let n = h.nrows();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let ph = C64::from_polar(1.0, eps * eig.values[j]);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= ph);
    }
    scaled * eig.vectors.adjoint()
}

fn basis_kl(rho: &CMat, sigma: &CMat, u: &CMat) -> DivValue {
    let d = u.ncols();
    let mut s = 0.0;
    for x in 0..d {
        let col = u.column(x);
        let p = (col.adjoint() * rho * col)[(0, 0)].re.max(0.0);
        let q = (col.adjoint() * sigma * col)[(0, 0)].re.max(0.0);
        if p <= 0.0 {
            continue;
        }
        if q <= 0.0 {
            return DivValue::PosInfinity;
        }
        s += p * (p.ln() - q.ln());
    }
    DivValue::Finite(s)
}
