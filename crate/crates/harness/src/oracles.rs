//! Small independent reference computations used by the suites.

/// Smallest `a` such that the outcomes with `(1/n) ln(r^n(x)/s^n(x)) <= a`
/// carry `r^n`-probability at least `1 - eps`, by listing all `d^n` outcomes.
/// Outcomes on the same likelihood level enter together.
pub fn classical_threshold(r: &[f64], s: &[f64], n: usize, eps: f64) -> f64 {
    let d = r.len();
    let total = d.pow(n as u32);
    let mut outcomes: Vec<(f64, f64)> = (0..total)
        .map(|mut x| {
            let (mut pr, mut ps) = (1.0, 1.0);
            for _ in 0..n {
                pr *= r[x % d];
                ps *= s[x % d];
                x /= d;
            }
            ((pr / ps).ln() / n as f64, pr)
        })
        .collect();
    outcomes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    let mut i = 0;
    while i < outcomes.len() {
        let level = outcomes[i].0;
        while i < outcomes.len() && (outcomes[i].0 - level).abs() < 1e-12 {
            acc += outcomes[i].1;
            i += 1;
        }
        if acc >= 1.0 - eps - 1e-12 {
            return level;
        }
    }
    outcomes.last().map(|o| o.0).unwrap_or(f64::NAN)
}

/// Least-squares `c` for `y ~ c x` and the relative RMS residual
/// `||y - c x|| / ||y||`.
pub fn scalar_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let res: f64 = x.iter().zip(y).map(|(a, b)| (b - c * a).powi(2)).sum();
    let norm: f64 = y.iter().map(|v| v * v).sum();
    (c, (res / norm).sqrt())
}
