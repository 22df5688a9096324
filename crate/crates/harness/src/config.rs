//! Suite configuration and the tolerance table.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context};
use qdiv_core::objects::DimCap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Monotonicity,
    Sandwich,
    JointConvexity,
    ReverseTestOptimality,
    IntegralIdentities,
    MetricOrdering,
    SteinTrend,
    Conversion,
    FidelityCounterexample,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Monotonicity,
        Suite::Sandwich,
        Suite::JointConvexity,
        Suite::ReverseTestOptimality,
        Suite::IntegralIdentities,
        Suite::MetricOrdering,
        Suite::SteinTrend,
        Suite::Conversion,
        Suite::FidelityCounterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Monotonicity => "monotonicity",
            Suite::Sandwich => "sandwich",
            Suite::JointConvexity => "joint-convexity",
            Suite::ReverseTestOptimality => "reverse-test-optimality",
            Suite::IntegralIdentities => "integral-identities",
            Suite::MetricOrdering => "metric-ordering",
            Suite::SteinTrend => "stein-trend",
            Suite::Conversion => "conversion",
            Suite::FidelityCounterexample => "fidelity-counterexample",
        }
    }

    /// Stable index used to derive per-suite seeds.
    pub fn id(self) -> u64 {
        Suite::ALL.iter().position(|s| *s == self).unwrap() as u64
    }

    /// Fixture suites run once, on the qubit fixtures, regardless of
    /// `trials` and `dims`.
    pub fn is_fixture_suite(self) -> bool {
        matches!(self, Suite::SteinTrend | Suite::Conversion)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).with_context(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
            format!("unknown suite {s:?} (expected one of {})", names.join(", "))
        })
    }
}

/// Every tolerance and numeric knob the suites use. Defaults follow the
/// library's own tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed increase of a divergence or metric under a channel.
    pub monotonicity: f64,
    pub sandwich: f64,
    /// Evaluation budget of the measured-divergence search.
    pub measured_budget: usize,
    pub joint_convexity: f64,
    /// `|kl(p, q) - D^R|`, reconstruction residuals, and competitor slack.
    pub reverse_test: f64,
    /// Competing reverse tests and estimations sampled per trial.
    pub competitors: usize,
    pub integral: f64,
    pub integral_nodes: usize,
    pub metric_ordering: f64,
    pub stein_eps: f64,
    /// Bound on `|a_n - D|` at the largest tested `n`.
    pub stein_final: f64,
    /// Refinement width for the commuting control.
    pub stein_control_width: f64,
    pub stein_control: f64,
    /// Rate offset `D - a` for the Neyman–Pearson substitute checks.
    pub np_gap: f64,
    pub np_type2: f64,
    pub converse_eps: f64,
    pub converse_slack: f64,
    pub conversion_c: f64,
    pub conversion_sigma: f64,
    /// Rate offset above `D` for the asymptotic reverse test.
    pub reverse_rate_gap: f64,
    pub reverse_sigma: f64,
    pub additivity: f64,
    pub fidelity_samples: usize,
    /// Smallest relative RMS residual of the best scalar fit `D^F ~ c D`
    /// that counts as "not proportional".
    pub fidelity_fit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            monotonicity: 1e-8,
            sandwich: 1e-8,
            measured_budget: 500,
            joint_convexity: 1e-8,
            reverse_test: 1e-8,
            competitors: 3,
            integral: 1e-6,
            integral_nodes: 64,
            metric_ordering: 1e-10,
            stein_eps: 0.5,
            stein_final: 0.1,
            stein_control_width: 1e-10,
            stein_control: 1e-9,
            np_gap: 0.3,
            np_type2: 1e-9,
            converse_eps: 0.1,
            converse_slack: 0.05,
            conversion_c: 0.05,
            conversion_sigma: 1e-9,
            reverse_rate_gap: 0.3,
            reverse_sigma: 1e-10,
            additivity: 1e-9,
            fidelity_samples: 12,
            fidelity_fit: 0.05,
        }
    }
}

impl Tolerances {
    /// Defaults with `overrides` applied by field name.
    pub fn with_overrides(overrides: &BTreeMap<String, serde_json::Value>) -> anyhow::Result<Self> {
        let mut value = serde_json::to_value(Self::default())?;
        let table = value.as_object_mut().expect("struct serializes to an object");
        for (k, v) in overrides {
            if !table.contains_key(k) {
                bail!("unknown tolerance {k:?}");
            }
            table.insert(k.clone(), v.clone());
        }
        serde_json::from_value(value).context("invalid tolerance override")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: u64,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, serde_json::Value>,
    /// Inclusive `[lo, hi]`; fixture suites use `lo, lo + 2, ..., hi`.
    #[serde(default = "default_n_range")]
    pub n_range: [usize; 2],
    /// Empty means every suite.
    #[serde(default)]
    pub suites: Vec<Suite>,
}

fn default_n_range() -> [usize; 2] {
    [2, 8]
}

impl SuiteConfig {
    pub fn minimal(seed: u64) -> Self {
        Self {
            seed,
            trials: 1,
            dims: vec![2],
            tolerances: BTreeMap::new(),
            n_range: default_n_range(),
            suites: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("malformed suite config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.dims.is_empty() {
            bail!("dims must not be empty");
        }
        if let Some(d) = self.dims.iter().find(|d| !(2..=6).contains(*d)) {
            bail!("dimension {d} outside 2..=6");
        }
        let [lo, hi] = self.n_range;
        if lo == 0 || lo > hi {
            bail!("n_range [{lo}, {hi}] is not a nonempty interval of positive integers");
        }
        let required = 1usize.checked_shl(hi as u32).filter(|_| hi < 63).unwrap_or(usize::MAX);
        DimCap::from_env()
            .check(required)
            .with_context(|| format!("n_range upper end {hi} exceeds the dimension cap for qubit fixtures"))?;
        Tolerances::with_overrides(&self.tolerances)?;
        Ok(())
    }

    pub fn tolerance_table(&self) -> anyhow::Result<Tolerances> {
        Tolerances::with_overrides(&self.tolerances)
    }

    pub fn selected_suites(&self) -> Vec<Suite> {
        if self.suites.is_empty() {
            Suite::ALL.to_vec()
        } else {
            let mut s = self.suites.clone();
            s.sort();
            s.dedup();
            s
        }
    }

    /// `lo, lo + 2, ...` up to and including `hi`.
    pub fn n_grid(&self) -> Vec<usize> {
        let [lo, hi] = self.n_range;
        let mut g: Vec<usize> = (lo..=hi).step_by(2).collect();
        if *g.last().unwrap() != hi {
            g.push(hi);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            let j = serde_json::to_string(&s).unwrap();
            assert_eq!(j, format!("\"{}\"", s.name()));
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn overrides_apply_by_name() {
        let mut o = BTreeMap::new();
        o.insert("integral".to_string(), serde_json::json!(1e-3));
        o.insert("measured_budget".to_string(), serde_json::json!(50));
        let t = Tolerances::with_overrides(&o).unwrap();
        assert_eq!(t.integral, 1e-3);
        assert_eq!(t.measured_budget, 50);
        assert_eq!(t.sandwich, Tolerances::default().sandwich);

        o.insert("bogus".to_string(), serde_json::json!(1));
        assert!(Tolerances::with_overrides(&o).is_err());
    }

    #[test]
    fn validation() {
        let mut c = SuiteConfig::minimal(1);
        c.validate().unwrap();
        c.trials = 0;
        assert!(c.validate().is_err());
        c.trials = 1;
        c.dims = vec![7];
        assert!(c.validate().is_err());
        c.dims = vec![2];
        c.n_range = [5, 3];
        assert!(c.validate().is_err());
        c.n_range = [2, 40];
        assert!(c.validate().is_err());
    }

    #[test]
    fn n_grid_includes_upper_end() {
        let mut c = SuiteConfig::minimal(1);
        assert_eq!(c.n_grid(), vec![2, 4, 6, 8]);
        c.n_range = [1, 4];
        assert_eq!(c.n_grid(), vec![1, 3, 4]);
        c.n_range = [3, 3];
        assert_eq!(c.n_grid(), vec![3]);
    }
}
