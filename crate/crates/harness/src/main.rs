use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use qdiv_core::asymptotics::{
    asymptotic_reverse_test, state_conversion, stein_threshold, test_curve, PowerPair, THRESHOLD_WIDTH,
};
use qdiv_core::divergences::{dmax, fidelity_logdiv, measured_div_lower, rld_entropy, umegaki, DivValue};
use qdiv_core::fixtures;
use qdiv_core::metrics::{metric_value, MonotoneMetricSpec};
use qdiv_core::objects::{DensityMatrix, TangentDirection};
use qdiv_core::reverse_test::optimal_reverse_test;
use qdiv_harness::{replay, run, CheckRecord, Suite, SuiteConfig};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "qdiv",
    version,
    about = "Quantum divergences, monotone metrics and reverse tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a divergence between two states.
    Divergence {
        #[arg(long, value_enum)]
        kind: DivKind,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// Evaluation budget for `--kind measured`.
        #[arg(long, default_value_t = 500)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a monotone metric on a tangent direction.
    Metric {
        /// sld, rld, bkm, wy or alpha=A
        #[arg(long)]
        spec: String,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        tangent: PathBuf,
    },
    /// Build the optimal reverse test of a pair.
    ReverseTest {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// Write the frame and the classical pair as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Finite-n hypothesis testing, reverse tests and conversion.
    Asym {
        #[command(subcommand)]
        command: AsymCommand,
    },
    /// Run verification suites; exits nonzero if any check fails.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Restrict to these suites (repeatable).
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Override the master seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Re-run the trial with this seed (needs exactly one --suite, and --dim).
        #[arg(long, requires = "dim")]
        replay: Option<u64>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Write a built-in fixture as rho.json, sigma.json and tangent.json.
    Fixture {
        /// qubit_a, qubit_b or qutrit
        name: String,
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum AsymCommand {
    /// Stein thresholds and test curves, as CSV.
    Threshold {
        #[arg(long)]
        n: usize,
        /// Smallest n; defaults to --n.
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Curve points per n, spread over threshold +- 0.5.
        #[arg(long, default_value_t = 11)]
        points: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Asymptotic reverse test at a given rate.
    ReverseTest {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Convert (rho0, sigma0)^n into approximately (rho, sigma)^n.
    Convert {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        rho0: PathBuf,
        #[arg(long)]
        sigma0: PathBuf,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        c: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DivKind {
    Umegaki,
    Rld,
    Dmax,
    Fidelity,
    Measured,
}

fn read_state(path: &Path) -> anyhow::Result<DensityMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    DensityMatrix::from_json(&text).with_context(|| format!("parsing state {}", path.display()))
}

fn read_tangent(path: &Path) -> anyhow::Result<TangentDirection> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    TangentDirection::from_json(&text).with_context(|| format!("parsing tangent {}", path.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// A closed pipe on stdout (`qdiv ... | head`) is not an error.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            || c.downcast_ref::<csv::Error>().is_some_and(|ce| match ce.kind() {
                csv::ErrorKind::Io(io) => io.kind() == std::io::ErrorKind::BrokenPipe,
                _ => false,
            })
    })
}

fn n_values(n: usize, n_min: Option<usize>) -> anyhow::Result<Vec<usize>> {
    let lo = n_min.unwrap_or(n);
    if lo == 0 || lo > n {
        bail!("need 1 <= --n-min <= --n");
    }
    Ok((lo..=n).collect())
}

fn divergence(kind: DivKind, rho: &Path, sigma: &Path, budget: usize, seed: u64) -> anyhow::Result<()> {
    let (rho, sigma) = (read_state(rho)?, read_state(sigma)?);
    let out = match kind {
        DivKind::Umegaki => serde_json::to_value(umegaki(&rho, &sigma)?)?,
        DivKind::Rld => serde_json::to_value(rld_entropy(&rho, &sigma)?)?,
        DivKind::Dmax => serde_json::to_value(dmax(&rho, &sigma)?)?,
        DivKind::Fidelity => json!({ "value": fidelity_logdiv(&rho, &sigma)? }),
        DivKind::Measured => {
            let (v, m): (DivValue, _) = measured_div_lower(&rho, &sigma, budget, seed)?;
            json!({ "value": v, "outcomes": m.outcomes(), "budget": budget, "seed": seed })
        }
    };
    print_json(&out)
}

fn threshold(
    n_list: &[usize],
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    points: usize,
    out: Box<dyn Write>,
) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "a", "type1_accept", "type2", "threshold"])?;
    for &n in n_list {
        let t = stein_threshold(rho, sigma, n, eps)?;
        let pair = PowerPair::new(rho, sigma, n)?;
        let rates: Vec<f64> = match points {
            0 => vec![],
            1 => vec![t],
            k => (0..k).map(|i| t - 0.5 + i as f64 / (k - 1) as f64).collect(),
        };
        for p in test_curve(&pair, n, &rates)? {
            w.serialize((n, p.a, p.type1_accept, p.type2, t))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn asym(cmd: AsymCommand) -> anyhow::Result<()> {
    match cmd {
        AsymCommand::Threshold {
            n,
            n_min,
            rho,
            sigma,
            eps,
            points,
            csv,
        } => {
            let (rho, sigma) = (read_state(&rho)?, read_state(&sigma)?);
            let out: Box<dyn Write> = match &csv {
                Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
                None => Box::new(std::io::stdout()),
            };
            eprintln!("thresholds refined to width {THRESHOLD_WIDTH}");
            threshold(&n_values(n, n_min)?, &rho, &sigma, eps, points, out)
        }
        AsymCommand::ReverseTest {
            n,
            rho,
            sigma,
            rate,
            json,
        } => {
            let (rho, sigma) = (read_state(&rho)?, read_state(&sigma)?);
            let rt = asymptotic_reverse_test(&rho, &sigma, n, rate)?;
            let out = json!({
                "n": n,
                "rate": rate,
                "p": rt.p.probs(),
                "q": rt.q.probs(),
                "report": rt.report,
            });
            match json {
                Some(p) => write_json(&p, &out),
                None => print_json(&out),
            }
        }
        AsymCommand::Convert {
            n,
            n_min,
            rho0,
            sigma0,
            rho,
            sigma,
            c,
            json,
        } => {
            let (rho0, sigma0) = (read_state(&rho0)?, read_state(&sigma0)?);
            let (rho, sigma) = (read_state(&rho)?, read_state(&sigma)?);
            let reports = n_values(n, n_min)?
                .into_iter()
                .map(|k| Ok(state_conversion(&rho0, &sigma0, &rho, &sigma, k, c)?.1))
                .collect::<anyhow::Result<Vec<_>>>()?;
            match json {
                Some(p) => write_json(&p, &reports),
                None => print_json(&reports),
            }
        }
    }
}

fn print_failure(r: &CheckRecord) {
    eprintln!(
        "FAIL {} {} dim={} trial={} seed={} digest={} measured={:e} bound={:e} margin={:e}{}",
        r.suite,
        r.check,
        r.dim,
        r.trial,
        r.seed,
        &r.inputs_digest[..16.min(r.inputs_digest.len())],
        r.measured,
        r.bound,
        r.margin,
        r.error.as_deref().map(|e| format!(" error={e}")).unwrap_or_default(),
    );
}

#[allow(clippy::too_many_arguments)]
fn verify(
    config: &Path,
    suites: Vec<String>,
    seed: Option<u64>,
    report: Option<PathBuf>,
    replay_seed: Option<u64>,
    dim: Option<usize>,
    trial: u64,
) -> anyhow::Result<bool> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg = SuiteConfig::from_json(&text)?;
    if !suites.is_empty() {
        cfg.suites = suites
            .iter()
            .map(|s| s.parse())
            .collect::<anyhow::Result<Vec<Suite>>>()?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }

    if let Some(rs) = replay_seed {
        let [suite] = cfg.suites[..] else {
            bail!("--replay needs exactly one --suite");
        };
        let probe = CheckRecord {
            suite,
            check: String::new(),
            trial,
            dim: dim.context("--replay needs --dim")?,
            seed: rs,
            inputs_digest: String::new(),
            measured: 0.0,
            bound: 0.0,
            relation: qdiv_harness::report::Relation::Le,
            margin: 0.0,
            pass: true,
            error: None,
        };
        let records = replay(&cfg, &probe)?;
        records.iter().filter(|r| !r.pass).for_each(print_failure);
        let ok = records.iter().all(|r| r.pass);
        match report {
            Some(p) => write_json(&p, &records)?,
            None => print_json(&records)?,
        }
        return Ok(ok);
    }

    let rep = run(&cfg)?;
    if let Some(p) = report {
        write_json(&p, &rep)?;
    }
    // the exit code carries the verdict even if stdout has gone away
    let mut out = std::io::stdout().lock();
    for s in &rep.suites {
        let _ = writeln!(
            out,
            "{:<26} {:>5} checks  {:>5} passed  {:>3} failed  {:>8.2}s",
            s.suite.name(),
            s.summary.total,
            s.summary.passed,
            s.summary.failed,
            s.wall_time_s
        );
    }
    let _ = writeln!(
        out,
        "total {} checks, {} failed, {:.2}s",
        rep.summary.total, rep.summary.failed, rep.wall_time_s
    );
    rep.failures().for_each(print_failure);
    Ok(rep.all_pass())
}

fn fixture(name: &str, dir: &Path) -> anyhow::Result<()> {
    let f = fixtures::by_name(name).with_context(|| format!("unknown fixture {name:?}"))?;
    fs::create_dir_all(dir)?;
    write_json(&dir.join("rho.json"), &f.rho.to_json_value())?;
    write_json(&dir.join("sigma.json"), &f.sigma.to_json_value())?;
    write_json(&dir.join("tangent.json"), &f.tangent.to_json_value())?;
    if let Some(s) = &f.source {
        write_json(&dir.join("rho0.json"), &s.rho.to_json_value())?;
        write_json(&dir.join("sigma0.json"), &s.sigma.to_json_value())?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Divergence {
            kind,
            rho,
            sigma,
            budget,
            seed,
        } => divergence(kind, &rho, &sigma, budget, seed)?,
        Command::Metric { spec, rho, tangent } => {
            let spec: MonotoneMetricSpec = spec.parse()?;
            let value = metric_value(&spec, &read_state(&rho)?, &read_tangent(&tangent)?)?;
            print_json(&json!({ "spec": spec.to_string(), "value": value }))?;
        }
        Command::ReverseTest { rho, sigma, json } => {
            let (rho, sigma) = (read_state(&rho)?, read_state(&sigma)?);
            let rt = optimal_reverse_test(&rho, &sigma)?;
            let (er, es) = rt.residuals(&rho, &sigma)?;
            let summary = json!({
                "input_kl": rt.input_kl,
                "rld_entropy": rld_entropy(&rho, &sigma)?.value,
                "rho_residual": er,
                "sigma_residual": es,
                "outcomes": rt.p.len(),
            });
            print_json(&summary)?;
            if let Some(p) = json {
                write_json(&p, &rt.to_json_value()?)?;
            }
        }
        Command::Asym { command } => asym(command)?,
        Command::Verify {
            config,
            suites,
            seed,
            report,
            replay,
            dim,
            trial,
        } => return verify(&config, suites, seed, report, replay, dim, trial),
        Command::Fixture { name, dir } => fixture(&name, &dir)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
