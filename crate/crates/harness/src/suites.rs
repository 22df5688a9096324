//! The verification suites. Every trial regenerates its inputs from its own
//! seed, so a record's `(suite, dim, trial, seed)` is enough to replay it.

use std::time::Instant;

use anyhow::Context;
use qdiv_core::asymptotics::{
    asymptotic_reverse_test_pair, np_point, state_conversion, stein_threshold, stein_threshold_with_width, PowerPair,
};
use qdiv_core::divergences::{dmax, fidelity_logdiv, kl, measured_div_lower, rld_entropy, umegaki, DivergenceReport};
use qdiv_core::fixtures::{self, Fixture};
use qdiv_core::metrics::{classical_fisher, integral_divergence, metric_value, MonotoneMetricSpec};
use qdiv_core::objects::{apply_channel, apply_channel_tangent, DensityMatrix, QuantumChannel};
use qdiv_core::random::{derive_seed, random_cptp, random_density, random_tangent};
use qdiv_core::reverse_test::{
    decomposition_competitor, optimal_reverse_test, random_competitor_estimation, reverse_estimation_1param,
};
use rayon::prelude::*;

use crate::config::{Suite, SuiteConfig, Tolerances};
use crate::oracles::{classical_threshold, scalar_fit};
use crate::report::{CheckRecord, InputDigest, Relation, RunReport, SuiteReport, Summary, TrialContext};

type Outcome = anyhow::Result<(f64, Relation, f64)>;
type DivFn = fn(&DensityMatrix, &DensityMatrix) -> qdiv_core::Result<DivergenceReport>;

/// Everything a trial needs besides its inputs.
#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub suite: Suite,
    pub trial: u64,
    pub dim: usize,
    pub seed: u64,
}

pub fn trial_seed(master: u64, suite: Suite, dim: usize, trial: u64) -> u64 {
    derive_seed(derive_seed(master, suite.id()), ((dim as u64) << 32) | trial)
}

/// The trials a suite runs under `config`, in report order.
pub fn trial_specs(config: &SuiteConfig, suite: Suite) -> Vec<TrialSpec> {
    if suite.is_fixture_suite() {
        return vec![TrialSpec {
            suite,
            trial: 0,
            dim: 2,
            seed: trial_seed(config.seed, suite, 2, 0),
        }];
    }
    let mut dims = config.dims.clone();
    dims.sort_unstable();
    dims.dedup();
    dims.iter()
        .flat_map(|&dim| {
            (0..config.trials).map(move |trial| TrialSpec {
                suite,
                trial,
                dim,
                seed: trial_seed(config.seed, suite, dim, trial),
            })
        })
        .collect()
}

pub fn run(config: &SuiteConfig) -> anyhow::Result<RunReport> {
    config.validate()?;
    let tol = config.tolerance_table()?;
    let start = Instant::now();
    let suites: Vec<SuiteReport> = config
        .selected_suites()
        .into_iter()
        .map(|s| run_suite(config, &tol, s))
        .collect();
    let summary = suites.iter().fold(Summary::default(), |acc, s| acc.merge(s.summary));
    Ok(RunReport {
        config: config.clone(),
        suites,
        summary,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

pub fn run_suite(config: &SuiteConfig, tol: &Tolerances, suite: Suite) -> SuiteReport {
    let start = Instant::now();
    let grid = config.n_grid();
    let records: Vec<CheckRecord> = trial_specs(config, suite)
        .par_iter()
        .map(|spec| run_trial(spec, tol, &grid))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    SuiteReport {
        suite,
        summary: Summary::of(&records),
        records,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// Re-runs the trial that produced `record`.
pub fn replay(config: &SuiteConfig, record: &CheckRecord) -> anyhow::Result<Vec<CheckRecord>> {
    let tol = config.tolerance_table()?;
    let spec = TrialSpec {
        suite: record.suite,
        trial: record.trial,
        dim: record.dim,
        seed: record.seed,
    };
    Ok(run_trial(&spec, &tol, &config.n_grid()))
}

pub fn run_trial(spec: &TrialSpec, tol: &Tolerances, n_grid: &[usize]) -> Vec<CheckRecord> {
    let result = match spec.suite {
        Suite::Monotonicity => monotonicity(spec, tol),
        Suite::Sandwich => sandwich(spec, tol),
        Suite::JointConvexity => joint_convexity(spec, tol),
        Suite::ReverseTestOptimality => reverse_test_optimality(spec, tol),
        Suite::IntegralIdentities => integral_identities(spec, tol),
        Suite::MetricOrdering => metric_ordering(spec, tol),
        Suite::SteinTrend => stein_trend(spec, tol, n_grid),
        Suite::Conversion => conversion(spec, tol, n_grid),
        Suite::FidelityCounterexample => fidelity_counterexample(spec, tol),
    };
    result.unwrap_or_else(|e| {
        // input generation failed; report it against an empty digest
        vec![context(spec, InputDigest::new(spec.suite)).failure("inputs", format!("{e:#}"))]
    })
}

fn context(spec: &TrialSpec, digest: InputDigest) -> TrialContext {
    TrialContext {
        suite: spec.suite,
        trial: spec.trial,
        dim: spec.dim,
        seed: spec.seed,
        digest: digest.finish(),
    }
}

fn check(ctx: &TrialContext, name: impl Into<String>, f: impl FnOnce() -> Outcome) -> CheckRecord {
    let name = name.into();
    match f() {
        Ok((measured, rel, bound)) => ctx.record(name, measured, rel, bound),
        Err(e) => ctx.failure(name, format!("{e:#}")),
    }
}

/// Uniform in `(lo, hi)` from the top 52 bits of a derived seed.
fn unit(seed: u64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * ((seed >> 12) as f64 + 0.5) / (1u64 << 52) as f64
}

fn full_rank(dim: usize, seed: u64) -> anyhow::Result<DensityMatrix> {
    Ok(random_density(dim, dim, seed)?)
}

/// Channel `dim -> dim_out` with `dim_out` in `2..=dim` and enough Kraus
/// operators for an isometry.
fn channel(dim: usize, seed: u64) -> anyhow::Result<QuantumChannel> {
    let dout = 2 + (derive_seed(seed, 0) % (dim as u64 - 1)) as usize;
    let k = 3usize.max(dim.div_ceil(dout));
    Ok(random_cptp(dim, dout, k, derive_seed(seed, 1))?)
}

fn finite(r: qdiv_core::Result<qdiv_core::divergences::DivergenceReport>) -> anyhow::Result<f64> {
    Ok(r?.expect_finite()?)
}

fn metric_specs() -> Vec<MonotoneMetricSpec> {
    let mut v = MonotoneMetricSpec::named().to_vec();
    v.push(MonotoneMetricSpec::alpha(0.5).expect("alpha = 0.5 is admissible"));
    v
}

fn monotonicity(spec: &TrialSpec, tol: &Tolerances) -> anyhow::Result<Vec<CheckRecord>> {
    let d = spec.dim;
    let rho = full_rank(d, derive_seed(spec.seed, 0))?;
    let sigma = full_rank(d, derive_seed(spec.seed, 1))?;
    let x = random_tangent(d, derive_seed(spec.seed, 2))?;
    let ch = channel(d, derive_seed(spec.seed, 3))?;
    let mut h = InputDigest::new(spec.suite);
    h.state(&rho).state(&sigma).tangent(&x).channel(&ch);
    let ctx = context(spec, h);

    let lr = apply_channel(&ch, &rho)?;
    let ls = apply_channel(&ch, &sigma)?;
    let lx = apply_channel_tangent(&ch, &x)?;
    let slack = tol.monotonicity;
    let mut out = Vec::new();
    let divs: [(&str, DivFn); 3] = [("umegaki", umegaki), ("rld_entropy", rld_entropy), ("dmax", dmax)];
    for (name, f) in divs {
        out.push(check(&ctx, name, || {
            Ok((finite(f(&lr, &ls))?, Relation::Le, finite(f(&rho, &sigma))? + slack))
        }));
    }
    for m in metric_specs() {
        out.push(check(&ctx, format!("metric_{m}"), || {
            Ok((
                metric_value(&m, &lr, &lx)?,
                Relation::Le,
                metric_value(&m, &rho, &x)? + slack,
            ))
        }));
    }
    Ok(out)
}

fn sandwich(spec: &TrialSpec, tol: &Tolerances) -> anyhow::Result<Vec<CheckRecord>> {
    let rho = full_rank(spec.dim, derive_seed(spec.seed, 0))?;
    let sigma = full_rank(spec.dim, derive_seed(spec.seed, 1))?;
    let mut h = InputDigest::new(spec.suite);
    h.state(&rho).state(&sigma);
    let ctx = context(spec, h);
    let d = finite(umegaki(&rho, &sigma))?;
    Ok(vec![
        check(&ctx, "measured_le_umegaki", || {
            let (v, _) = measured_div_lower(&rho, &sigma, tol.measured_budget, derive_seed(spec.seed, 2))?;
            Ok((v.expect_finite()?, Relation::Le, d + tol.sandwich))
        }),
        check(&ctx, "umegaki_le_rld", || {
            Ok((d, Relation::Le, finite(rld_entropy(&rho, &sigma))? + tol.sandwich))
        }),
    ])
}

fn joint_convexity(spec: &TrialSpec, tol: &Tolerances) -> anyhow::Result<Vec<CheckRecord>> {
    let states = (0..4)
        .map(|k| full_rank(spec.dim, derive_seed(spec.seed, k)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let t = unit(derive_seed(spec.seed, 4), 0.0, 1.0);
    let mut h = InputDigest::new(spec.suite);
    states.iter().for_each(|s| {
        h.state(s);
    });
    h.scalar(t);
    let ctx = context(spec, h);
    let (r1, s1, r2, s2) = (&states[0], &states[1], &states[2], &states[3]);
    Ok(vec![check(&ctx, "rld_joint_convexity", || {
        let mixed = finite(rld_entropy(&r1.mix(r2, t)?, &s1.mix(s2, t)?))?;
        let bound = t * finite(rld_entropy(r1, s1))? + (1.0 - t) * finite(rld_entropy(r2, s2))?;
        Ok((mixed, Relation::Le, bound + tol.joint_convexity))
    })])
}

fn reverse_test_optimality(spec: &TrialSpec, tol: &Tolerances) -> anyhow::Result<Vec<CheckRecord>> {
    let rho = full_rank(spec.dim, derive_seed(spec.seed, 0))?;
    let sigma = full_rank(spec.dim, derive_seed(spec.seed, 1))?;
    let x = random_tangent(spec.dim, derive_seed(spec.seed, 2))?;
    let mut h = InputDigest::new(spec.suite);
    h.state(&rho).state(&sigma).tangent(&x);
    let ctx = context(spec, h);
    let eps = tol.reverse_test;
    let mut out = Vec::new();

    let rt = optimal_reverse_test(&rho, &sigma)?;
    out.push(check(&ctx, "kl_equals_rld", || {
        let gap = (kl(&rt.p, &rt.q)?.expect_finite()? - finite(rld_entropy(&rho, &sigma))?).abs();
        Ok((gap, Relation::Le, eps))
    }));
    out.push(check(&ctx, "reverse_test_reconstruction", || {
        let (a, b) = rt.residuals(&rho, &sigma)?;
        Ok((a.max(b), Relation::Le, eps))
    }));
    for k in 0..tol.competitors {
        out.push(check(&ctx, format!("decomposition_competitor_{k}"), || {
            let c = decomposition_competitor(&rho, &sigma, derive_seed(spec.seed, 10 + k as u64))?;
            let (a, b) = c.residuals(&rho, &sigma)?;
            anyhow::ensure!(
                a.max(b) <= eps,
                "competitor does not reproduce the pair (residual {:.3e})",
                a.max(b)
            );
            Ok((c.input_kl, Relation::Ge, rt.input_kl - eps))
        }));
    }

    let jr = metric_value(&MonotoneMetricSpec::rld(), &rho, &x)?;
    out.push(check(&ctx, "reverse_estimation_attains_rld", || {
        let est = reverse_estimation_1param(&rho, &x)?;
        let fisher = classical_fisher(&est.p, std::slice::from_ref(&est.dp))?
            .scalar()
            .context("one-parameter Fisher matrix")?;
        Ok(((fisher - jr).abs(), Relation::Le, eps))
    }));
    for k in 0..tol.competitors {
        out.push(check(&ctx, format!("estimation_competitor_{k}"), || {
            let c = random_competitor_estimation(&rho, &x, k, derive_seed(spec.seed, 100 + k as u64))?;
            let fisher = classical_fisher(&c.p, std::slice::from_ref(&c.dp))?
                .scalar()
                .context("one-parameter Fisher matrix")?;
            Ok((fisher, Relation::Ge, jr - eps))
        }));
    }
    Ok(out)
}

fn integral_identities(spec: &TrialSpec, tol: &Tolerances) -> anyhow::Result<Vec<CheckRecord>> {
    let rho = full_rank(spec.dim, derive_seed(spec.seed, 0))?;
    let sigma = full_rank(spec.dim, derive_seed(spec.seed, 1))?;
    let mut h = InputDigest::new(spec.suite);
    h.state(&rho).state(&sigma);
    let ctx = context(spec, h);
    let nodes = tol.integral_nodes;
    Ok(vec![
        check(&ctx, "bkm_integral_equals_umegaki", || {
            let est = integral_divergence(&MonotoneMetricSpec::bkm(), &rho, &sigma, nodes)?;
            Ok((
                (est.value - finite(umegaki(&rho, &sigma))?).abs(),
                Relation::Le,
                tol.integral,
            ))
        }),
        check(&ctx, "rld_integral_equals_rld_entropy", || {
            let est = integral_divergence(&MonotoneMetricSpec::rld(), &rho, &sigma, nodes)?;
            Ok((
                (est.value - finite(rld_entropy(&rho, &sigma))?).abs(),
                Relation::Le,
                tol.integral,
            ))
        }),
    ])
}

fn metric_ordering(spec: &TrialSpec, tol: &Tolerances) -> anyhow::Result<Vec<CheckRecord>> {
    let rho = full_rank(spec.dim, derive_seed(spec.seed, 0))?;
    let x = random_tangent(spec.dim, derive_seed(spec.seed, 1))?;
    let mut h = InputDigest::new(spec.suite);
    h.state(&rho).tangent(&x);
    let ctx = context(spec, h);
    let chain = [
        MonotoneMetricSpec::sld(),
        MonotoneMetricSpec::wy(),
        MonotoneMetricSpec::bkm(),
        MonotoneMetricSpec::rld(),
    ];
    let values = chain
        .iter()
        .map(|m| metric_value(m, &rho, &x))
        .collect::<qdiv_core::Result<Vec<_>>>()?;
    Ok((0..3)
        .map(|i| {
            let name = format!("{}_le_{}", chain[i], chain[i + 1]);
            ctx.record(name, values[i + 1] - values[i], Relation::Ge, -tol.metric_ordering)
        })
        .collect())
}

fn fixture_context(spec: &TrialSpec, fs: &[&Fixture]) -> TrialContext {
    let mut h = InputDigest::new(spec.suite);
    for f in fs {
        h.state(&f.rho).state(&f.sigma);
        if let Some(s) = &f.source {
            h.state(&s.rho).state(&s.sigma);
        }
    }
    context(spec, h)
}

/// Commuting pair for the brute-force control.
const CONTROL: ([f64; 2], [f64; 2]) = ([0.7, 0.3], [0.4, 0.6]);
/// Largest `n` for the control; `2^n` outcomes are enumerated.
const CONTROL_MAX_N: usize = 10;

fn stein_trend(spec: &TrialSpec, tol: &Tolerances, grid: &[usize]) -> anyhow::Result<Vec<CheckRecord>> {
    let f = fixtures::qubit_a();
    let ctx = fixture_context(spec, &[&f]);
    let d = f.reference.umegaki;
    let mut out = Vec::new();

    let gaps: Vec<anyhow::Result<f64>> = grid
        .par_iter()
        .map(|&n| Ok((stein_threshold(&f.rho, &f.sigma, n, tol.stein_eps)? - d).abs()))
        .collect();
    for w in 0..grid.len().saturating_sub(1) {
        out.push(check(
            &ctx,
            format!("threshold_gap_n{}_lt_n{}", grid[w + 1], grid[w]),
            || {
                let (prev, cur) = (
                    gaps[w].as_ref().map_err(|e| anyhow::anyhow!("{e:#}"))?,
                    gaps[w + 1].as_ref().map_err(|e| anyhow::anyhow!("{e:#}"))?,
                );
                Ok((*cur, Relation::Lt, *prev))
            },
        ));
    }
    let n_hi = *grid.last().unwrap();
    out.push(check(&ctx, format!("threshold_gap_n{n_hi}"), || {
        let g = gaps.last().unwrap().as_ref().map_err(|e| anyhow::anyhow!("{e:#}"))?;
        Ok((*g, Relation::Le, tol.stein_final))
    }));

    let (r, s) = CONTROL;
    let rho_c = DensityMatrix::diagonal(&r)?;
    let sigma_c = DensityMatrix::diagonal(&s)?;
    for n in 1..=n_hi.min(CONTROL_MAX_N) {
        out.push(check(&ctx, format!("commuting_control_n{n}"), || {
            let got = stein_threshold_with_width(&rho_c, &sigma_c, n, tol.stein_eps, tol.stein_control_width)?;
            Ok((
                (got - classical_threshold(&r, &s, n, tol.stein_eps)).abs(),
                Relation::Le,
                tol.stein_control,
            ))
        }));
    }

    // Neyman–Pearson test as the substitute measurement, on the fixture and
    // on its source pair
    let src = f.source.clone().context("fixture qubit_a has a source pair")?;
    let pairs = [
        ("fixture", &f.rho, &f.sigma, d),
        ("source", &src.rho, &src.sigma, src.umegaki),
    ];
    for (label, rho, sigma, dpair) in pairs {
        let a = dpair - tol.np_gap;
        let points = grid
            .iter()
            .map(|&n| np_point(&PowerPair::new(rho, sigma, n)?, a, n))
            .collect::<qdiv_core::Result<Vec<_>>>();
        let points = match points {
            Ok(p) => p,
            Err(e) => {
                out.push(ctx.failure(format!("np_{label}"), e));
                continue;
            }
        };
        for (&n, p) in grid.iter().zip(&points) {
            let bound = (-(n as f64) * a).exp() * (1.0 + tol.np_type2);
            out.push(ctx.record(format!("np_{label}_type2_n{n}"), p.type2, Relation::Le, bound));
        }
        let (first, last) = (&points[0], points.last().unwrap());
        out.push(ctx.record(
            format!("np_{label}_power_n{n_hi}_gt_n{}", grid[0]),
            1.0 - last.type1_accept,
            Relation::Gt,
            1.0 - first.type1_accept,
        ));
    }

    // empirical converse on NP sequences at rates below D
    let bound = stein_threshold(&f.rho, &f.sigma, n_hi, tol.converse_eps)? + tol.converse_slack;
    for k in 0..6 {
        let a = d - 0.6 + 0.1 * k as f64;
        let seq = grid
            .iter()
            .map(|&n| np_point(&PowerPair::new(&f.rho, &f.sigma, n)?, a, n))
            .collect::<qdiv_core::Result<Vec<_>>>()?;
        let min_power = seq.iter().map(|p| 1.0 - p.type1_accept).fold(f64::INFINITY, f64::min);
        out.push(ctx.record(
            format!("converse_power_k{k}"),
            min_power,
            Relation::Gt,
            tol.converse_eps,
        ));
        let exponent = -seq.last().unwrap().type2.ln() / n_hi as f64;
        out.push(ctx.record(format!("converse_exponent_k{k}"), exponent, Relation::Le, bound));
    }
    Ok(out)
}

fn conversion(spec: &TrialSpec, tol: &Tolerances, grid: &[usize]) -> anyhow::Result<Vec<CheckRecord>> {
    let fs = [fixtures::qubit_a(), fixtures::qubit_b()];
    let ctx = fixture_context(spec, &[&fs[0], &fs[1]]);
    let mut out = Vec::new();
    let (lo, hi) = (grid[0], *grid.last().unwrap());
    for f in &fs {
        let src = f.source.as_ref().context("qubit fixtures carry a source pair")?;
        let rate = f.reference.umegaki + tol.reverse_rate_gap;
        let runs: Vec<_> = grid
            .par_iter()
            .map(|&n| {
                let conv = state_conversion(&src.rho, &src.sigma, &f.rho, &f.sigma, n, tol.conversion_c);
                let rev = PowerPair::new(&f.rho, &f.sigma, n).and_then(|p| asymptotic_reverse_test_pair(&p, n, rate));
                (n, conv.map(|c| c.1), rev.map(|r| r.report))
            })
            .collect();
        let mut conv_dist = Vec::new();
        let mut rev_dist = Vec::new();
        for (n, conv, rev) in runs {
            match conv {
                Ok(rep) => {
                    out.push(ctx.record(
                        format!("{}_conversion_sigma_n{n}", f.name),
                        rep.sigma_residual,
                        Relation::Le,
                        tol.conversion_sigma,
                    ));
                    conv_dist.push(rep.rho_trace_distance);
                }
                Err(e) => out.push(ctx.failure(format!("{}_conversion_n{n}", f.name), e)),
            }
            match rev {
                Ok(rep) => {
                    out.push(ctx.record(
                        format!("{}_reverse_test_sigma_n{n}", f.name),
                        rep.sigma_residual,
                        Relation::Le,
                        tol.reverse_sigma,
                    ));
                    rev_dist.push(rep.trace_distance);
                }
                Err(e) => out.push(ctx.failure(format!("{}_reverse_test_n{n}", f.name), e)),
            }
        }
        if grid.len() > 1 {
            for (label, dist) in [("conversion", &conv_dist), ("reverse_test", &rev_dist)] {
                let name = format!("{}_{label}_rho_n{hi}_lt_n{lo}", f.name);
                if dist.len() == grid.len() {
                    out.push(ctx.record(name, dist[dist.len() - 1], Relation::Lt, dist[0]));
                } else {
                    out.push(ctx.failure(name, "missing runs"));
                }
            }
        }
    }
    Ok(out)
}

fn fidelity_counterexample(spec: &TrialSpec, tol: &Tolerances) -> anyhow::Result<Vec<CheckRecord>> {
    let d = spec.dim;
    let mixed = DensityMatrix::maximally_mixed(d);
    let m = tol.fidelity_samples.max(2);
    let mut h = InputDigest::new(spec.suite);
    let mut samples = Vec::with_capacity(m);
    for i in 0..m {
        let s = derive_seed(spec.seed, i as u64);
        // ranks cycle so the sample spans near-pure and well-mixed states
        let rank = 1 + i % d;
        let rho = random_density(d, rank, derive_seed(s, 0))?.mix(&mixed, 0.95)?;
        let sigma = full_rank(d, derive_seed(s, 1))?;
        let ch = channel(d, derive_seed(s, 2))?;
        h.state(&rho).state(&sigma).channel(&ch);
        samples.push((rho, sigma, ch));
    }
    let ctx = context(spec, h);
    let df =
        |r: &DensityMatrix, s: &DensityMatrix| -> anyhow::Result<f64> { Ok(fidelity_logdiv(r, s)?.expect_finite()?) };

    let values = samples
        .iter()
        .map(|(r, s, _)| df(r, s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut out = Vec::new();
    out.push(check(&ctx, "fidelity_additivity", || {
        let mut worst: f64 = 0.0;
        for i in 0..m {
            let j = (i + 1) % m;
            let (ri, si, _) = &samples[i];
            let (rj, sj, _) = &samples[j];
            let joint = df(&ri.kron(rj), &si.kron(sj))?;
            worst = worst.max((joint - values[i] - values[j]).abs());
        }
        Ok((worst, Relation::Le, tol.additivity))
    }));
    out.push(check(&ctx, "fidelity_monotone", || {
        // ln F is non-decreasing under channels
        let mut worst = f64::INFINITY;
        for ((r, s, ch), v) in samples.iter().zip(&values) {
            worst = worst.min(df(&apply_channel(ch, r)?, &apply_channel(ch, s)?)? - v);
        }
        Ok((worst, Relation::Ge, -tol.monotonicity))
    }));
    out.push(check(&ctx, "fidelity_not_proportional_to_umegaki", || {
        let ds = samples
            .iter()
            .map(|(r, s, _)| finite(umegaki(r, s)))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let (_, residual) = scalar_fit(&ds, &values);
        Ok((residual, Relation::Ge, tol.fidelity_fit))
    }));
    Ok(out)
}
