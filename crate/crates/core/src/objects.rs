//! Density matrices, tangent directions, channels, measurements and
//! classical distributions.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, psd_repair_values, reconstruct, trace_product, CMat, CVec, EigenSystem, HermitianMatrix, C64,
};

pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const TP_TOL: f64 = 1e-9;
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Environment variable overriding [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "QDIV_DIM_CAP";

/// Largest Hilbert-space dimension a tensor power may reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimCap(pub usize);

impl Default for DimCap {
    fn default() -> Self {
        DimCap(DEFAULT_DIM_CAP)
    }
}

impl DimCap {
    pub fn from_env() -> Self {
        std::env::var(DIM_CAP_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .map(DimCap)
            .unwrap_or_default()
    }

    pub fn check(&self, required: usize) -> Result<()> {
        if required > self.0 {
            Err(Error::DimensionCap { required, cap: self.0 })
        } else {
            Ok(())
        }
    }
}

/// Positive semidefinite unit-trace Hermitian matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    eig: OnceLock<EigenSystem>,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl DensityMatrix {
    /// Validates trace and positivity; roundoff-level negative eigenvalues are
    /// clipped and the trace renormalized.
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let trace = matrix.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::Trace {
                trace,
                residual: (trace - 1.0).abs(),
            });
        }
        let eig = eigh(&matrix)?;
        let min = eig.values.first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        if min >= 0.0 {
            return Ok(Self {
                matrix,
                eig: OnceLock::from(eig),
            });
        }
        let clipped: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let vals: Vec<f64> = clipped.iter().map(|v| v / total).collect();
        let repaired = reconstruct(&eig.vectors, &vals);
        Ok(Self {
            matrix: HermitianMatrix::hermitize(repaired),
            eig: OnceLock::from(EigenSystem {
                values: vals,
                vectors: eig.vectors,
            }),
        })
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Wraps a matrix that is a density matrix by construction (tensor
    /// products, convex mixtures). Only the Hermitian part is taken.
    pub(crate) fn trusted(m: CMat) -> Self {
        Self {
            matrix: HermitianMatrix::hermitize(m),
            eig: OnceLock::new(),
        }
    }

    /// Normalizes a PSD matrix after PSD repair of its spectrum.
    pub(crate) fn normalized_psd(m: CMat) -> Result<Self> {
        let eig = crate::linalg::eigh_mat(&m)?;
        let vals = psd_repair_values(&eig.values)?;
        let total: f64 = vals.iter().sum();
        if total <= 0.0 {
            return Err(Error::Trace {
                trace: total,
                residual: 1.0,
            });
        }
        let vals: Vec<f64> = vals.iter().map(|v| v / total).collect();
        Ok(Self {
            matrix: HermitianMatrix::hermitize(reconstruct(&eig.vectors, &vals)),
            eig: OnceLock::from(EigenSystem {
                values: vals,
                vectors: eig.vectors,
            }),
        })
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        ClassicalDistribution::new(probs.to_vec())?;
        Self::new(HermitianMatrix::from_real_diagonal(probs))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::trusted(CMat::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0))
    }

    /// `|psi><psi|` for a nonzero vector, normalized.
    pub fn pure(psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidShape("pure state vector must be nonzero".into()));
        }
        let v = psi / C64::new(norm, 0.0);
        Ok(Self::trusted(&v * v.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn as_mat(&self) -> &CMat {
        self.matrix.as_mat()
    }

    /// Cached eigendecomposition.
    pub fn eigen(&self) -> Result<&EigenSystem> {
        if let Some(e) = self.eig.get() {
            return Ok(e);
        }
        let e = eigh(&self.matrix)?;
        Ok(self.eig.get_or_init(|| e))
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.eigen()?.rank())
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix.is_diagonal()
    }

    /// `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidShape(format!("mixing weight {t} outside [0, 1]")));
        }
        Ok(Self::trusted(
            self.as_mat() * C64::new(t, 0.0) + other.as_mat() * C64::new(1.0 - t, 0.0),
        ))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::trusted(self.as_mat().kronecker(other.as_mat()))
    }

    /// Matrix functions of the state restricted to its support.
    pub(crate) fn sqrt_mat(&self) -> Result<CMat> {
        let e = self.eigen()?;
        let vals: Vec<f64> = e.values.iter().map(|v| v.max(0.0).sqrt()).collect();
        Ok(e.reconstruct_with(&vals))
    }
}

/// Traceless Hermitian matrix, a tangent vector to the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentDirection {
    matrix: HermitianMatrix,
}

impl TangentDirection {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let trace = matrix.trace();
        if trace.abs() > TRACE_TOL {
            return Err(Error::NotTraceless { trace });
        }
        Ok(Self { matrix })
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub(crate) fn trusted(m: CMat) -> Self {
        Self {
            matrix: HermitianMatrix::hermitize(m),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::trusted(CMat::zeros(dim, dim))
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(entries))
    }

    /// Tangent `rho - sigma` of the mixture path.
    pub fn between(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        check_dims(rho.dim(), sigma.dim())?;
        Ok(Self::trusted(rho.as_mat() - sigma.as_mat()))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn as_mat(&self) -> &CMat {
        self.matrix.as_mat()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::trusted(self.as_mat() * C64::new(a, 0.0))
    }
}

/// CPTP map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
}

impl QuantumChannel {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<CMat>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidShape("channel needs at least one Kraus operator".into()));
        }
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::InvalidShape(format!(
                    "Kraus operator is {}x{}, expected {dim_out}x{dim_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let mut sum = CMat::zeros(dim_in, dim_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let residual = (sum - CMat::identity(dim_in, dim_in)).norm();
        if residual > TP_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![CMat::identity(dim, dim)],
        }
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        let d = u.nrows();
        Self::new(d, d, vec![u])
    }

    /// Measure in the computational basis and replace by `I/d`.
    pub fn completely_depolarizing(dim: usize) -> Self {
        let s = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        let mut kraus = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut k = CMat::zeros(dim, dim);
                k[(i, j)] = s;
                kraus.push(k);
            }
        }
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus,
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &QuantumChannel) -> Result<Self> {
        check_dims(after.dim_in, self.dim_out)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for a in &after.kraus {
            for b in &self.kraus {
                kraus.push(a * b);
            }
        }
        Ok(Self {
            dim_in: self.dim_in,
            dim_out: after.dim_out,
            kraus,
        })
    }

    pub(crate) fn apply_mat(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }
}

/// Positive operator-valued measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    effects: Vec<HermitianMatrix>,
}

impl Measurement {
    pub fn new(effects: Vec<HermitianMatrix>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidShape("measurement needs at least one effect".into()))?;
        let d = first.dim();
        let mut sum = CMat::zeros(d, d);
        for e in &effects {
            check_dims(d, e.dim())?;
            let eig = eigh(e)?;
            let min = eig.values.first().copied().unwrap_or(0.0);
            if min < -PSD_TOL {
                return Err(Error::NotPsd { min_eigenvalue: min });
            }
            sum += e.as_mat();
        }
        let residual = (sum - CMat::identity(d, d)).norm();
        if residual > TP_TOL {
            return Err(Error::IncompleteMeasurement { residual });
        }
        Ok(Self { effects })
    }

    /// Rank-1 projective measurement onto the orthonormal columns of `basis`.
    pub fn projective(basis: &CMat) -> Result<Self> {
        let effects = (0..basis.ncols())
            .map(|j| {
                let v = basis.column(j);
                HermitianMatrix::hermitize(v * v.adjoint())
            })
            .collect();
        Self::new(effects)
    }

    pub fn computational(dim: usize) -> Self {
        let effects = (0..dim)
            .map(|k| {
                let mut d = vec![0.0; dim];
                d[k] = 1.0;
                HermitianMatrix::from_real_diagonal(&d)
            })
            .collect();
        Self { effects }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    /// Pushforward of a tangent direction: `tr(E_k X)` per outcome.
    pub fn push_tangent(&self, x: &TangentDirection) -> Result<Vec<f64>> {
        check_dims(self.dim(), x.dim())?;
        Ok(self
            .effects
            .iter()
            .map(|e| trace_product(e.as_mat(), x.as_mat()).re)
            .collect())
    }

    /// The measurement as a quantum-classical channel onto diagonal states.
    pub fn as_channel(&self) -> Result<QuantumChannel> {
        let d = self.dim();
        let k_out = self.outcomes();
        let mut kraus = Vec::new();
        for (k, e) in self.effects.iter().enumerate() {
            let root = crate::linalg::matrix_function(e, |x| x.max(0.0).sqrt(), false)?;
            for i in 0..d {
                let mut op = CMat::zeros(k_out, d);
                for j in 0..d {
                    op[(k, j)] = root.as_mat()[(i, j)];
                }
                kraus.push(op);
            }
        }
        QuantumChannel::new(d, k_out, kraus)
    }
}

/// Probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    /// Entries down to `-1e-12` are treated as roundoff and clipped to zero.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        let mut out = Vec::with_capacity(probs.len());
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < -1e-12 {
                return Err(Error::InvalidDistribution(format!("entry {i} is {p}")));
            }
            out.push(p.max(0.0));
        }
        let sum: f64 = out.iter().sum();
        if (sum - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum:.15} (residual {:.3e})",
                (sum - 1.0).abs()
            )));
        }
        Ok(Self { probs: out })
    }

    pub fn point_mass(len: usize, x: usize) -> Result<Self> {
        if x >= len {
            return Err(Error::InvalidShape(format!("point mass at {x} with length {len}")));
        }
        let mut p = vec![0.0; len];
        p[x] = 1.0;
        Ok(Self { probs: p })
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        check_dims(self.len(), other.len())?;
        Self::new(
            self.probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect(),
        )
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::trusted(HermitianMatrix::from_real_diagonal(&self.probs).into_mat())
    }
}

/// Classical-to-quantum preparation: one state per classical symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Preparation {
    states: Vec<DensityMatrix>,
}

impl Preparation {
    pub fn new(states: Vec<DensityMatrix>) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidShape("preparation needs at least one state".into()))?;
        let d = first.dim();
        for s in &states {
            check_dims(d, s.dim())?;
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// Post-composes every prepared state with a channel.
    pub fn then(&self, ch: &QuantumChannel) -> Result<Self> {
        let states = self
            .states
            .iter()
            .map(|s| apply_channel(ch, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(states)
    }

    /// `sum_x t(x) states[x]` for a signed weight vector (tangent pushforward).
    pub fn apply_weights(&self, weights: &[f64]) -> Result<CMat> {
        check_dims(self.len(), weights.len())?;
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for (s, &w) in self.states.iter().zip(weights) {
            out += s.as_mat() * C64::new(w, 0.0);
        }
        Ok(out)
    }
}

pub fn apply_channel(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_dims(ch.dim_in, rho.dim())?;
    DensityMatrix::normalized_psd(ch.apply_mat(rho.as_mat()))
}

pub fn apply_channel_tangent(ch: &QuantumChannel, x: &TangentDirection) -> Result<TangentDirection> {
    check_dims(ch.dim_in, x.dim())?;
    Ok(TangentDirection::trusted(ch.apply_mat(x.as_mat())))
}

pub fn cq_apply(prep: &Preparation, p: &ClassicalDistribution) -> Result<DensityMatrix> {
    let m = prep.apply_weights(p.probs())?;
    Ok(DensityMatrix::trusted(m))
}

pub fn measure(m: &Measurement, rho: &DensityMatrix) -> Result<ClassicalDistribution> {
    check_dims(m.dim(), rho.dim())?;
    let probs: Vec<f64> = m
        .effects
        .iter()
        .map(|e| trace_product(e.as_mat(), rho.as_mat()).re)
        .collect();
    let sum: f64 = probs.iter().sum();
    ClassicalDistribution::new(probs.iter().map(|p| p.max(0.0) / sum).collect())
}

/// n-fold tensor power under the environment-configured dimension cap.
pub fn tensor_power(rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    tensor_power_capped(rho, n, DimCap::from_env())
}

pub fn tensor_power_capped(rho: &DensityMatrix, n: usize, cap: DimCap) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidShape("tensor power needs n >= 1".into()));
    }
    let required = rho.dim().checked_pow(n as u32).unwrap_or(usize::MAX);
    cap.check(required)?;
    let mut out = rho.as_mat().clone();
    for _ in 1..n {
        out = out.kronecker(rho.as_mat());
    }
    Ok(DensityMatrix::trusted(out))
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}
