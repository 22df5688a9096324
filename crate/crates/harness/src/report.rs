//! Check records and suite reports.

use qdiv_core::objects::{DensityMatrix, QuantumChannel, TangentDirection};
use qdiv_core::CMat;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Suite, SuiteConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `measured <= bound`
    Le,
    /// `measured < bound`
    Lt,
    /// `measured >= bound`
    Ge,
    /// `measured > bound`
    Gt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: Suite,
    pub check: String,
    pub trial: u64,
    pub dim: usize,
    /// Seed from which this trial's inputs are generated.
    pub seed: u64,
    pub inputs_digest: String,
    pub measured: f64,
    pub bound: f64,
    pub relation: Relation,
    /// Signed distance to the bound; non-negative when the relation holds.
    pub margin: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-trial context shared by the records it emits.
#[derive(Debug, Clone)]
pub struct TrialContext {
    pub suite: Suite,
    pub trial: u64,
    pub dim: usize,
    pub seed: u64,
    pub digest: String,
}

impl TrialContext {
    pub fn record(&self, check: impl Into<String>, measured: f64, relation: Relation, bound: f64) -> CheckRecord {
        let margin = match relation {
            Relation::Le | Relation::Lt => bound - measured,
            Relation::Ge | Relation::Gt => measured - bound,
        };
        let pass = match relation {
            Relation::Le | Relation::Ge => margin >= 0.0,
            Relation::Lt | Relation::Gt => margin > 0.0,
        };
        // NaN and infinities cannot pass and cannot be written as JSON numbers
        let (measured, bound, margin, error) = if measured.is_finite() && bound.is_finite() {
            (measured, bound, margin, None)
        } else {
            (
                0.0,
                0.0,
                0.0,
                Some(format!("non-finite value: measured {measured}, bound {bound}")),
            )
        };
        CheckRecord {
            suite: self.suite,
            check: check.into(),
            trial: self.trial,
            dim: self.dim,
            seed: self.seed,
            inputs_digest: self.digest.clone(),
            measured,
            bound,
            relation,
            margin,
            pass: pass && error.is_none(),
            error,
        }
    }

    pub fn failure(&self, check: impl Into<String>, err: impl std::fmt::Display) -> CheckRecord {
        CheckRecord {
            suite: self.suite,
            check: check.into(),
            trial: self.trial,
            dim: self.dim,
            seed: self.seed,
            inputs_digest: self.digest.clone(),
            measured: 0.0,
            bound: 0.0,
            relation: Relation::Le,
            margin: 0.0,
            pass: false,
            error: Some(err.to_string()),
        }
    }
}

/// SHA-256 over the raw entries of the trial inputs.
#[derive(Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new(suite: Suite) -> Self {
        let mut h = Sha256::new();
        h.update(suite.name().as_bytes());
        Self(h)
    }

    pub fn matrix(&mut self, m: &CMat) -> &mut Self {
        self.0.update((m.nrows() as u64).to_le_bytes());
        self.0.update((m.ncols() as u64).to_le_bytes());
        for z in m.iter() {
            self.0.update(z.re.to_le_bytes());
            self.0.update(z.im.to_le_bytes());
        }
        self
    }

    pub fn state(&mut self, s: &DensityMatrix) -> &mut Self {
        self.matrix(s.as_mat())
    }

    pub fn tangent(&mut self, x: &TangentDirection) -> &mut Self {
        self.matrix(x.as_mat())
    }

    pub fn channel(&mut self, ch: &QuantumChannel) -> &mut Self {
        for k in ch.kraus() {
            self.matrix(k);
        }
        self
    }

    pub fn scalar(&mut self, v: f64) -> &mut Self {
        self.0.update(v.to_le_bytes());
        self
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn of(records: &[CheckRecord]) -> Self {
        let passed = records.iter().filter(|r| r.pass).count();
        Self {
            total: records.len(),
            passed,
            failed: records.len() - passed,
        }
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            total: self.total + other.total,
            passed: self.passed + other.passed,
            failed: self.failed + other.failed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
    pub wall_time_s: f64,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: SuiteConfig,
    pub suites: Vec<SuiteReport>,
    pub summary: Summary,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    /// The same report with every wall time zeroed, for comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.wall_time_s = 0.0;
        r.suites.iter_mut().for_each(|s| s.wall_time_s = 0.0);
        r
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.suites.iter().flat_map(|s| s.failures())
    }
}
