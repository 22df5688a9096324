//! Finite-n hypothesis testing: Neyman–Pearson projectors, the Stein
//! threshold, smoothing, asymptotic reverse tests and state conversion.
//!
//! Products of diagonal states stay diagonal; those are handled as
//! probability vectors so commuting instances reach `2^10` outcomes cheaply.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergences::{dmax, umegaki};
use crate::error::{Error, Result};
use crate::linalg::{eigh_mat, hermitian_part, trace_norm_mat, CMat, EigenSystem, C64};
use crate::objects::{check_dims, cq_apply, tensor_power, ClassicalDistribution, DensityMatrix, Preparation};

/// Eigenvalues of `rho^n - e^{na} sigma^n` within this fraction of the
/// larger operator norm count as zero (and so belong to the accepted space).
const NP_ZERO_REL: f64 = 1e-12;
/// Width at which the threshold grid stops refining.
pub const THRESHOLD_WIDTH: f64 = 1e-3;
const GRID_POINTS: usize = 32;
const MAX_EXTENSIONS: usize = 40;
/// Steps and bisections of the smoothing-parameter search.
const SMOOTHING_STEPS: usize = 12;
const SMOOTHING_BISECTIONS: usize = 4;
/// A certificate counts as meeting a rate within this slack.
const CERT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestCurvePoint {
    pub a: f64,
    pub type1_accept: f64,
    pub type2: f64,
}

/// `rho^n` and `sigma^n`; diagonal pairs also keep their diagonals.
#[derive(Debug, Clone)]
pub struct PowerPair {
    rho: DensityMatrix,
    sigma: DensityMatrix,
    diag: Option<(Vec<f64>, Vec<f64>)>,
}

impl PowerPair {
    /// n-fold tensor powers under the configured dimension cap.
    pub fn new(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize) -> Result<Self> {
        check_dims(rho.dim(), sigma.dim())?;
        if n == 0 {
            return Err(Error::InvalidShape("n must be at least 1".into()));
        }
        Self::from_powers(&tensor_power(rho, n)?, &tensor_power(sigma, n)?)
    }

    /// Wraps already formed `rho^n`, `sigma^n`.
    pub fn from_powers(rho_n: &DensityMatrix, sigma_n: &DensityMatrix) -> Result<Self> {
        check_dims(rho_n.dim(), sigma_n.dim())?;
        let diag = (rho_n.is_diagonal() && sigma_n.is_diagonal()).then(|| {
            let d = |m: &DensityMatrix| (0..m.dim()).map(|i| m.as_mat()[(i, i)].re).collect();
            (d(rho_n), d(sigma_n))
        });
        Ok(PowerPair {
            rho: rho_n.clone(),
            sigma: sigma_n.clone(),
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn sigma(&self) -> &DensityMatrix {
        &self.sigma
    }

    /// `rho^n - e^{na} sigma^n` and the tolerance for its zero eigenvalues.
    fn difference(&self, a: f64, n: usize) -> (CMat, f64) {
        let c = (n as f64 * a).exp();
        let tol = NP_ZERO_REL * (1.0_f64).max(c);
        let diff = self.rho.as_mat() - self.sigma.as_mat() * C64::new(c, 0.0);
        (hermitian_part(&diff), tol)
    }
}

fn diag_mat(v: &[f64]) -> CMat {
    CMat::from_fn(v.len(), v.len(), |i, j| {
        if i == j {
            C64::new(v[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn quad(m: &CMat, v: nalgebra::DVectorView<'_, C64>) -> f64 {
    (v.adjoint() * m * v)[(0, 0)].re
}

/// Accepted-set indicator on the eigenbasis of the difference operator
/// (or on the diagonal), together with that basis for dense pairs.
fn np_split(pair: &PowerPair, a: f64, n: usize) -> Result<(Vec<bool>, Option<EigenSystem>)> {
    if let Some((r, s)) = &pair.diag {
        let c = (n as f64 * a).exp();
        let tol = NP_ZERO_REL * (1.0_f64).max(c);
        let keep = r.iter().zip(s).map(|(r, s)| r - c * s <= tol).collect();
        return Ok((keep, None));
    }
    let (diff, tol) = pair.difference(a, n);
    let eig = eigh_mat(&diff)?;
    let keep = eig.values.iter().map(|&v| v <= tol).collect();
    Ok((keep, Some(eig)))
}

/// Curve point without forming the projector.
pub fn np_point(pair: &PowerPair, a: f64, n: usize) -> Result<TestCurvePoint> {
    let (keep, eig) = np_split(pair, a, n)?;
    let mut accept = 0.0;
    let mut type2 = 0.0;
    match (&pair.diag, eig) {
        (Some((r, s)), _) => {
            for (k, &kept) in keep.iter().enumerate() {
                if kept {
                    accept += r[k];
                } else {
                    type2 += s[k];
                }
            }
        }
        (None, Some(eig)) => {
            for (k, &kept) in keep.iter().enumerate() {
                let v = eig.vectors.column(k);
                if kept {
                    accept += quad(pair.rho.as_mat(), v);
                } else {
                    type2 += quad(pair.sigma.as_mat(), v);
                }
            }
        }
        (None, None) => unreachable!("dense split always carries its eigenbasis"),
    }
    Ok(TestCurvePoint {
        a,
        type1_accept: accept,
        type2,
    })
}

/// Projector onto the non-positive eigenspace of `rho^n - e^{na} sigma^n`
/// and its curve point.
pub fn np_projector(
    rho_n: &DensityMatrix,
    sigma_n: &DensityMatrix,
    a: f64,
    n: usize,
) -> Result<(CMat, TestCurvePoint)> {
    let pair = PowerPair::from_powers(rho_n, sigma_n)?;
    np_projector_pair(&pair, a, n)
}

fn np_projector_pair(pair: &PowerPair, a: f64, n: usize) -> Result<(CMat, TestCurvePoint)> {
    let (keep, eig) = np_split(pair, a, n)?;
    let ind: Vec<f64> = keep.iter().map(|&k| if k { 1.0 } else { 0.0 }).collect();
    let projector = match eig {
        Some(e) => e.reconstruct_with(&ind),
        None => diag_mat(&ind),
    };
    Ok((projector, np_point(pair, a, n)?))
}

/// Curve points on a list of rates.
pub fn test_curve(pair: &PowerPair, n: usize, rates: &[f64]) -> Result<Vec<TestCurvePoint>> {
    rates.par_iter().map(|&a| np_point(pair, a, n)).collect()
}

fn lower_rate_guess(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let er = rho.eigen()?;
    let lmin = er
        .support_indices()
        .iter()
        .map(|&k| er.values[k])
        .fold(f64::INFINITY, f64::min);
    let smax = sigma.eigen()?.values.last().copied().unwrap_or(1.0);
    Ok((lmin / smax).ln() - 1.0)
}

/// Smallest grid rate `a` with `type1_accept(a) >= 1 - eps`, refined until
/// the bracketing cell is narrower than `width`. The acceptance curve is
/// scanned, not bisected.
pub fn stein_threshold_with_width(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    eps: f64,
    width: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidShape(format!("eps = {eps} outside (0, 1)")));
    }
    let upper = dmax(rho, sigma)?;
    let upper = upper
        .value
        .finite()
        .ok_or_else(|| Error::SupportViolated(upper.notes.first().cloned().unwrap_or_default()))?;
    let pair = PowerPair::new(rho, sigma, n)?;
    let target = 1.0 - eps;
    let mut hi = upper + 0.5;
    let mut lo = lower_rate_guess(rho, sigma)?.min(upper - 0.5);
    let mut extensions = 0;
    loop {
        let grid: Vec<f64> = (0..=GRID_POINTS)
            .map(|k| lo + (hi - lo) * k as f64 / GRID_POINTS as f64)
            .collect();
        let pts = test_curve(&pair, n, &grid)?;
        let first = pts.iter().position(|p| p.type1_accept >= target - 1e-12);
        match first {
            None => return Err(Error::GridExhausted { lo, hi }),
            Some(0) => {
                extensions += 1;
                if extensions > MAX_EXTENSIONS {
                    return Err(Error::GridExhausted { lo, hi });
                }
                let w = hi - lo;
                hi = lo;
                lo -= w;
            }
            Some(k) => {
                if grid[k] - grid[k - 1] <= width {
                    return Ok(grid[k]);
                }
                lo = grid[k - 1];
                hi = grid[k];
            }
        }
    }
}

/// [`stein_threshold_with_width`] at the default grid width.
pub fn stein_threshold(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize, eps: f64) -> Result<f64> {
    stein_threshold_with_width(rho, sigma, n, eps, THRESHOLD_WIDTH)
}

#[derive(Debug, Clone)]
pub struct SmoothedState {
    pub state: DensityMatrix,
    /// The rate `a` the smoothing was asked for.
    pub rate: f64,
    /// `1 - type1_accept(a)`.
    pub epsilon: f64,
    /// `||state - rho^n||_1`.
    pub trace_distance: f64,
    /// `dmax(state || sigma^n) / n`.
    pub rate_certificate: f64,
    /// `trace_distance <= 4 sqrt(2 eps) + 1e-6`.
    pub distance_bound_holds: bool,
    /// `rate_certificate <= a + ln(1/(1 - sqrt(8 eps)))/n + 1e-6`, vacuous for `eps >= 1/8`.
    pub rate_bound_holds: bool,
}

/// Cut-positive-part smoothing: `A = rho^n - (rho^n - e^{na} sigma^n)_+`,
/// clipped to its positive part and normalized, with recorded certificates.
pub fn smooth_state(rho_n: &DensityMatrix, sigma_n: &DensityMatrix, a: f64, n: usize) -> Result<SmoothedState> {
    let pair = PowerPair::from_powers(rho_n, sigma_n)?;
    smooth_pair(&pair, a, n)
}

/// How the mass removed by the cut is restored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Completion {
    /// `A_+ / tr A_+`
    Normalize,
    /// `A_+ + (1 - tr A_+) sigma^n`, which costs far less certificate rate
    /// than rescaling when `e^{na}` is large.
    PadWithSigma,
}

fn smooth_pair(pair: &PowerPair, a: f64, n: usize) -> Result<SmoothedState> {
    smooth_pair_with(pair, a, n, Completion::Normalize)
}

fn smooth_pair_with(pair: &PowerPair, a: f64, n: usize, completion: Completion) -> Result<SmoothedState> {
    let (cut, total, epsilon) = cut_positive_part(pair, a, n)?;
    complete(pair, cut, total, epsilon, a, n, completion)
}

/// `(A_+, tr A_+, 1 - type1_accept(a))` with `A = rho^n - (rho^n - e^{na} sigma^n)_+`.
fn cut_positive_part(pair: &PowerPair, a: f64, n: usize) -> Result<(CMat, f64, f64)> {
    if let Some((r, s)) = &pair.diag {
        let epsilon = (1.0 - np_point(pair, a, n)?.type1_accept).max(0.0);
        let c = (n as f64 * a).exp();
        // classical tail cutting: min(r, c s)
        let cut: Vec<f64> = r.iter().zip(s).map(|(r, s)| r.min(c * s)).collect();
        let total: f64 = cut.iter().sum();
        return Ok((diag_mat(&cut), total, epsilon));
    }
    let (diff, tol) = pair.difference(a, n);
    let eig = eigh_mat(&diff)?;
    let mut accept = 0.0;
    let mut pos = Vec::with_capacity(eig.values.len());
    for (k, &v) in eig.values.iter().enumerate() {
        if v > tol {
            pos.push(v);
        } else {
            pos.push(0.0);
            accept += quad(pair.rho.as_mat(), eig.vectors.column(k));
        }
    }
    let cand = hermitian_part(&(pair.rho.as_mat() - eig.reconstruct_with(&pos)));
    let ec = eigh_mat(&cand)?;
    let clipped: Vec<f64> = ec.values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    Ok((ec.reconstruct_with(&clipped), total, (1.0 - accept).max(0.0)))
}

fn complete(
    pair: &PowerPair,
    cut: CMat,
    total: f64,
    epsilon: f64,
    a: f64,
    n: usize,
    completion: Completion,
) -> Result<SmoothedState> {
    if total < 1e-12 {
        return Err(Error::DegenerateSmoothing { trace: total });
    }
    let state = match completion {
        Completion::Normalize => cut / C64::new(total, 0.0),
        Completion::PadWithSigma => cut + pair.sigma.as_mat() * C64::new((1.0 - total).max(0.0), 0.0),
    };
    certify(pair, DensityMatrix::trusted(state), a, epsilon, n)
}

fn certify(pair: &PowerPair, state: DensityMatrix, a: f64, epsilon: f64, n: usize) -> Result<SmoothedState> {
    let trace_distance = trace_norm_mat(&(state.as_mat() - pair.rho.as_mat()))?;
    let cert = dmax(&state, &pair.sigma)?;
    let rate_certificate = cert
        .value
        .finite()
        .ok_or_else(|| Error::SupportViolated(cert.notes.first().cloned().unwrap_or_default()))?
        / n as f64;
    let distance_bound_holds = trace_distance <= 4.0 * (2.0 * epsilon).sqrt() + 1e-6;
    let rate_bound_holds = if 8.0 * epsilon < 1.0 {
        let slack = (1.0 / (1.0 - (8.0 * epsilon).sqrt())).ln() / n as f64;
        rate_certificate <= a + slack + 1e-6
    } else {
        true
    };
    Ok(SmoothedState {
        state,
        rate: a,
        epsilon,
        trace_distance,
        rate_certificate,
        distance_bound_holds,
        rate_bound_holds,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FidelityReport {
    /// `||Phi(p) - rho^n||_1`.
    pub trace_distance: f64,
    /// `||Phi(q) - sigma^n||_1`.
    pub sigma_residual: f64,
    /// Smoothing parameter of the prepared state.
    pub smoothing_rate: f64,
    /// `dmax(Phi(delta_0) || sigma^n) / n`.
    pub rate_certificate: f64,
}

#[derive(Debug, Clone)]
pub struct AsymptoticReverseTest {
    pub preparation: Preparation,
    pub p: ClassicalDistribution,
    pub q: ClassicalDistribution,
    pub report: FidelityReport,
}

/// Best certified smoothing of `rho^n` at or below `rate`: among the
/// smoothed states whose certificate does not exceed `rate`, the one closest
/// to `rho^n` in trace norm. `sigma^n` itself is always a candidate.
///
/// For each completion the smoothing parameter is stepped down by twice the
/// certificate excess until it becomes feasible, then bisected against the
/// last infeasible one.
fn best_feasible_smoothing(pair: &PowerPair, n: usize, rate: f64) -> Result<SmoothedState> {
    let mut best = certify(pair, pair.sigma.clone(), f64::NEG_INFINITY, 1.0, n)?;
    for completion in [Completion::Normalize, Completion::PadWithSigma] {
        search_completion(pair, n, rate, completion, &mut best)?;
    }
    Ok(best)
}

fn search_completion(
    pair: &PowerPair,
    n: usize,
    rate: f64,
    completion: Completion,
    best: &mut SmoothedState,
) -> Result<()> {
    let consider = |c: SmoothedState, best: &mut SmoothedState| {
        let feasible = c.rate_certificate <= rate + CERT_SLACK;
        if feasible && c.trace_distance < best.trace_distance {
            *best = c;
        }
        feasible
    };
    let mut infeasible = None;
    let mut feasible = None;
    let mut s = rate;
    for _ in 0..SMOOTHING_STEPS {
        let cand = match smooth_pair_with(pair, s, n, completion) {
            Ok(c) => c,
            Err(Error::DegenerateSmoothing { .. }) => break,
            Err(e) => return Err(e),
        };
        let excess = cand.rate_certificate - rate;
        if consider(cand, best) {
            feasible = Some(s);
            break;
        }
        infeasible = Some(s);
        s -= 2.0 * excess + CERT_SLACK;
    }
    if let (Some(mut lo), Some(mut hi)) = (feasible, infeasible) {
        for _ in 0..SMOOTHING_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let ok = match smooth_pair_with(pair, mid, n, completion) {
                Ok(c) => consider(c, best),
                Err(Error::DegenerateSmoothing { .. }) => false,
                Err(e) => return Err(e),
            };
            if ok {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(())
}

/// Two-state preparation with `Phi(q) = sigma^n` exactly and `Phi(p)` close
/// to `rho^n`; `q = (e^{-n rate}, 1 - e^{-n rate})`, `p = (1, 0)`.
pub fn asymptotic_reverse_test(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    rate: f64,
) -> Result<AsymptoticReverseTest> {
    let pair = PowerPair::new(rho, sigma, n)?;
    asymptotic_reverse_test_pair(&pair, n, rate)
}

/// [`asymptotic_reverse_test`] on already formed powers.
pub fn asymptotic_reverse_test_pair(pair: &PowerPair, n: usize, rate: f64) -> Result<AsymptoticReverseTest> {
    if rate.is_nan() || rate < 0.0 {
        return Err(Error::InfeasibleRate { rate, minimal: 0.0 });
    }
    let smoothed = if rate.is_infinite() {
        certify(pair, pair.rho.clone(), rate, 0.0, n)?
    } else {
        best_feasible_smoothing(pair, n, rate)?
    };
    let q0 = (-(n as f64) * rate).exp();
    let sigma_n = pair.sigma.as_mat();
    let other = if q0 >= 1.0 - 1e-15 {
        pair.sigma.clone()
    } else {
        let m = (sigma_n - smoothed.state.as_mat() * C64::new(q0, 0.0)) / C64::new(1.0 - q0, 0.0);
        DensityMatrix::normalized_psd(m)?
    };
    let preparation = Preparation::new(vec![smoothed.state.clone(), other])?;
    let p = ClassicalDistribution::new(vec![1.0, 0.0])?;
    let q = ClassicalDistribution::new(vec![q0, 1.0 - q0])?;
    let sigma_out = cq_apply(&preparation, &q)?;
    let sigma_residual = trace_norm_mat(&(sigma_out.as_mat() - sigma_n))?;
    Ok(AsymptoticReverseTest {
        preparation,
        p,
        q,
        report: FidelityReport {
            trace_distance: smoothed.trace_distance,
            sigma_residual,
            smoothing_rate: smoothed.rate,
            rate_certificate: smoothed.rate_certificate,
        },
    })
}

/// Measure-and-prepare channel: the binary test `{P, I - P}` on the source
/// copies followed by a two-state preparation.
#[derive(Debug, Clone)]
pub struct ConversionChannel {
    /// Projector of outcome 0 on the source space.
    pub projector: CMat,
    pub preparation: Preparation,
}

impl ConversionChannel {
    pub fn apply(&self, input: &CMat) -> Result<DensityMatrix> {
        check_dims(self.projector.nrows(), input.nrows())?;
        let p0 = crate::linalg::trace_product(&self.projector, input).re;
        let total = input.trace().re;
        let w = [p0, total - p0];
        Ok(DensityMatrix::trusted(self.preparation.apply_weights(&w)?))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConversionReport {
    pub n: usize,
    /// Test rate `D(rho || sigma) + c` on the source pair.
    pub test_rate: f64,
    /// `tr rho0^n P` and `tr sigma0^n P`.
    pub p0: f64,
    pub q0: f64,
    /// `-ln q0 / n`, infinite when `q0 = 0`.
    pub rate: f64,
    /// `||Psi(sigma0^n) - sigma^n||_1`.
    pub sigma_residual: f64,
    /// `||Psi(rho0^n) - rho^n||_1`.
    pub rho_trace_distance: f64,
    pub smoothing: FidelityReport,
}

/// Converts `(rho0, sigma0)^n` into approximately `(rho, sigma)^n`, exactly
/// on the second argument, assuming `D(rho0||sigma0) > D(rho||sigma) + 2c`.
pub fn state_conversion(
    rho0: &DensityMatrix,
    sigma0: &DensityMatrix,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    c: f64,
) -> Result<(ConversionChannel, ConversionReport)> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidShape(format!("c = {c} must be positive")));
    }
    let d_source = umegaki(rho0, sigma0)?.expect_finite()?;
    let d_target = umegaki(rho, sigma)?.expect_finite()?;
    if d_source <= d_target + 2.0 * c {
        return Err(Error::GapViolated {
            d_source,
            required: d_target + 2.0 * c,
        });
    }
    let source = PowerPair::new(rho0, sigma0, n)?;
    let test_rate = d_target + c;
    let (accept_proj, point) = np_projector_pair(&source, test_rate, n)?;
    let dim0 = source.dim();
    let projector = CMat::identity(dim0, dim0) - accept_proj;
    let p0 = (1.0 - point.type1_accept).clamp(0.0, 1.0);
    let q0 = point.type2.clamp(0.0, 1.0);
    let rate = if q0 > 0.0 { -q0.ln() / n as f64 } else { f64::INFINITY };

    let target = PowerPair::new(rho, sigma, n)?;
    let test = asymptotic_reverse_test_pair(&target, n, rate.max(0.0))?;
    let channel = ConversionChannel {
        projector,
        preparation: test.preparation.clone(),
    };
    let out_sigma = channel.apply(source.sigma.as_mat())?;
    let out_rho = channel.apply(source.rho.as_mat())?;
    let sigma_residual = trace_norm_mat(&(out_sigma.as_mat() - target.sigma.as_mat()))?;
    let rho_trace_distance = trace_norm_mat(&(out_rho.as_mat() - target.rho.as_mat()))?;
    Ok((
        channel,
        ConversionReport {
            n,
            test_rate,
            p0,
            q0,
            rate,
            sigma_residual,
            rho_trace_distance,
            smoothing: test.report,
        },
    ))
}

/// Eigen-decomposition helper shared with tests: the accepted subspace of
/// the NP test as an eigensystem of the difference operator.
pub fn np_difference_eigen(rho_n: &DensityMatrix, sigma_n: &DensityMatrix, a: f64, n: usize) -> Result<EigenSystem> {
    let pair = PowerPair::from_powers(rho_n, sigma_n)?;
    let (diff, _) = pair.difference(a, n);
    eigh_mat(&diff)
}
