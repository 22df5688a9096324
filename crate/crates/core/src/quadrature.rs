//! Gauss–Legendre quadrature on `[0, 1]` with node doubling.

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 64;
pub const NODE_CAP: usize = 1024;
pub const DOUBLING_TOL: f64 = 1e-8;

/// Nodes and weights for `[0, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    Ok((nodes, weights))
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Sum in a fixed binary tree so the result does not depend on scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// `int_0^1 f` with `n` nodes; nodes are evaluated in parallel.
pub fn integrate<F>(f: &F, n: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (nodes, weights) = gauss_legendre(n)?;
    let terms = nodes
        .par_iter()
        .zip(weights.par_iter())
        .map(|(&x, &w)| f(x).map(|v| w * v))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub nodes: usize,
    /// |difference| between the last two estimates.
    pub change: f64,
}

/// Doubles the node count from `start` until successive estimates agree to
/// `tol` or `cap` nodes are reached.
pub fn integrate_adaptive<F>(f: &F, start: usize, tol: f64, cap: usize) -> Result<Estimate>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let mut n = start;
    let mut prev = integrate(f, n)?;
    loop {
        if n * 2 > cap.max(start) {
            return Ok(Estimate {
                value: prev,
                nodes: n,
                change: f64::NAN,
            });
        }
        n *= 2;
        let cur = integrate(f, n)?;
        let change = (cur - prev).abs();
        if change < tol {
            return Ok(Estimate {
                value: cur,
                nodes: n,
                change,
            });
        }
        prev = cur;
    }
}
