//! Fixed state pairs with reference values computed by an external
//! numpy/scipy script (`tools/gen_fixtures.py`).

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io::StateJson;
use crate::objects::{DensityMatrix, TangentDirection};

const QUBIT_A: &str = include_str!("../fixtures/qubit_a.json");
const QUBIT_B: &str = include_str!("../fixtures/qubit_b.json");
const QUTRIT: &str = include_str!("../fixtures/qutrit.json");

/// Reference values in nats.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct Reference {
    pub umegaki: f64,
    pub rld_entropy: f64,
    pub dmax: f64,
    pub fidelity_logdiv: f64,
    /// `int_0^1 (1 - s) J^S_{rho_s}(rho - sigma) ds`.
    pub sld_integral: f64,
    pub metric_sld: f64,
    pub metric_wy: f64,
    pub metric_bkm: f64,
    pub metric_rld: f64,
}

#[derive(Debug, Deserialize)]
struct SourceJson {
    rho: StateJson,
    sigma: StateJson,
    umegaki: f64,
}

#[derive(Debug, Deserialize)]
struct FixtureJson {
    name: String,
    rho: StateJson,
    sigma: StateJson,
    tangent: StateJson,
    reference: Reference,
    source: Option<SourceJson>,
}

/// Source pair for state conversion, with `D(rho0 || sigma0)`.
#[derive(Debug, Clone)]
pub struct SourcePair {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub umegaki: f64,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub tangent: TangentDirection,
    pub reference: Reference,
    pub source: Option<SourcePair>,
}

fn load(text: &str) -> Result<Fixture> {
    let f: FixtureJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let source = match f.source {
        Some(s) => Some(SourcePair {
            rho: DensityMatrix::from_json_value(&s.rho)?,
            sigma: DensityMatrix::from_json_value(&s.sigma)?,
            umegaki: s.umegaki,
        }),
        None => None,
    };
    Ok(Fixture {
        name: f.name,
        rho: DensityMatrix::from_json_value(&f.rho)?,
        sigma: DensityMatrix::from_json_value(&f.sigma)?,
        tangent: TangentDirection::from_json_value(&f.tangent)?,
        reference: f.reference,
        source,
    })
}

fn expect(text: &str) -> Fixture {
    load(text).expect("bundled fixture is valid")
}

pub fn qubit_a() -> Fixture {
    expect(QUBIT_A)
}

pub fn qubit_b() -> Fixture {
    expect(QUBIT_B)
}

pub fn qutrit() -> Fixture {
    expect(QUTRIT)
}

pub fn all() -> Vec<Fixture> {
    vec![qubit_a(), qubit_b(), qutrit()]
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}
