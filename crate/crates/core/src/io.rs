//! JSON file formats for states, tangents, channels and distributions.
//!
//! Matrices are nested row arrays of `[re, im]` pairs. Parsing validates the
//! same invariants as the in-memory constructors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};
use crate::objects::{ClassicalDistribution, DensityMatrix, QuantumChannel, TangentDirection};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub dim: usize,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionJson {
    pub probs: Vec<f64>,
}

pub fn matrix_to_json(m: &CMat) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<CMat> {
    let nrows = rows.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if nrows == 0 || ncols == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(nrows, ncols, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

pub fn vector_to_json(v: &CVec) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn square_with_dim(dim: usize, rows: &JsonMatrix) -> Result<CMat> {
    let m = matrix_from_json(rows)?;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Parse(format!(
            "declared dim {dim} but matrix is {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

impl DensityMatrix {
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_value(&parse(text)?)
    }

    pub fn from_json_value(s: &StateJson) -> Result<Self> {
        DensityMatrix::from_matrix(square_with_dim(s.dim, &s.matrix)?)
    }

    pub fn to_json_value(&self) -> StateJson {
        StateJson {
            dim: self.dim(),
            matrix: matrix_to_json(self.as_mat()),
        }
    }
}

impl TangentDirection {
    /// Same layout as a state file; validated as traceless Hermitian.
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_value(&parse(text)?)
    }

    pub fn from_json_value(s: &StateJson) -> Result<Self> {
        TangentDirection::from_matrix(square_with_dim(s.dim, &s.matrix)?)
    }

    pub fn to_json_value(&self) -> StateJson {
        StateJson {
            dim: self.dim(),
            matrix: matrix_to_json(self.as_mat()),
        }
    }
}

impl QuantumChannel {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ChannelJson = parse(text)?;
        let kraus = c.kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        QuantumChannel::new(c.dim_in, c.dim_out, kraus)
    }

    pub fn to_json_value(&self) -> ChannelJson {
        ChannelJson {
            dim_in: self.dim_in(),
            dim_out: self.dim_out(),
            kraus: self.kraus().iter().map(matrix_to_json).collect(),
        }
    }
}

impl ClassicalDistribution {
    pub fn from_json(text: &str) -> Result<Self> {
        let d: DistributionJson = parse(text)?;
        ClassicalDistribution::new(d.probs)
    }

    pub fn to_json_value(&self) -> DistributionJson {
        DistributionJson {
            probs: self.probs().to_vec(),
        }
    }
}
