//! Random-state ensembles: Haar (CUE column) states, eigenvectors of the
//! intermediate unitary matrices, central eigenstates of a disordered
//! interacting qubit Hamiltonian, and exchangeable fixed-moduli states.
//!
//! Qubit 0 is the most significant bit of the computational index.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use faer::{c64, Mat, MatRef, Side};
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seed;

const NORM_TOL: f64 = 1e-12;

/// A normalized pure state of `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: u32,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubit_count(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid!("state norm² is {norm}, expected 1"));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubit_count(amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid!("cannot normalize a vector of norm {norm}"));
        }
        let inv = 1.0 / norm;
        amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::normalized(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: u32, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(invalid!(
                "basis index {index} out of range for {dim} amplitudes"
            ));
        }
        let mut amps = vec![Complex64::zero(); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    /// Equal-weight superposition of all basis states.
    pub fn uniform(n_qubits: u32) -> Self {
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            n_qubits,
            amplitudes: vec![a; dim],
        }
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Squared moduli `|ψ_i|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

fn qubit_count(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(invalid!("state length {len} is not a power of two"));
    }
    Ok(len.trailing_zeros())
}

/// Haar-random state: a normalized vector of i.i.d. standard complex
/// Gaussians, distributed like one column of a CUE matrix.
pub fn sample_cue_state<R: Rng + ?Sized>(n_qubits: u32, rng: &mut R) -> Result<StateVector> {
    if n_qubits < 1 {
        return Err(invalid!("CUE states need at least one qubit"));
    }
    let dim = 1usize << n_qubits;
    let amps = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::normalized(amps)
}

/// Exact rational parameter of the intermediate ensemble, written `"p/q"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gamma(pub Ratio<i64>);

impl Gamma {
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(invalid!("gamma denominator is zero"));
        }
        Ok(Gamma(Ratio::new(numer, denom)))
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// True when `dim · γ` is an integer, which makes the ensemble degenerate.
    pub fn is_degenerate_for(self, dim: usize) -> bool {
        (Ratio::from_integer(dim as i64) * self.0).is_integer()
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Gamma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: i64 = n
            .parse()
            .map_err(|_| invalid!("gamma must be an exact rational like 1/3, got {s:?}"))?;
        let d: i64 = d
            .parse()
            .map_err(|_| invalid!("gamma must be an exact rational like 1/3, got {s:?}"))?;
        Gamma::new(n, d)
    }
}

impl Serialize for Gamma {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One draw of the intermediate unitary ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntermediateSpec {
    pub dim: usize,
    pub gamma: Gamma,
    pub seed: u64,
}

impl IntermediateSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(invalid!("matrix dimension must be positive"));
        }
        if self.gamma.is_degenerate_for(self.dim) {
            return Err(invalid!(
                "N*gamma must not be an integer (N={}, gamma={}): the ensemble is degenerate",
                self.dim,
                self.gamma
            ));
        }
        Ok(())
    }
}

/// `U_kl = e^{iφ_k}/N · (1 - e^{2iπNγ}) / (1 - e^{2iπ(k-l+Nγ)/N})` with
/// `φ_k` drawn uniformly in `[0, 2π)` from `spec.seed`.
pub fn intermediate_matrix(spec: &IntermediateSpec) -> Result<Mat<c64>> {
    spec.validate()?;
    let mut rng = seed::stream(spec.seed, &[]);
    let phases: Vec<f64> = (0..spec.dim).map(|_| rng.random::<f64>() * TAU).collect();
    intermediate_matrix_with_phases(spec.dim, spec.gamma, &phases)
}

/// Same matrix with the diagonal phases supplied by the caller.
pub fn intermediate_matrix_with_phases(
    dim: usize,
    gamma: Gamma,
    phases: &[f64],
) -> Result<Mat<c64>> {
    IntermediateSpec {
        dim,
        gamma,
        seed: 0,
    }
    .validate()?;
    if phases.len() != dim {
        return Err(invalid!("expected {dim} phases, got {}", phases.len()));
    }
    let n = dim as f64;
    let g = gamma.to_f64();
    // Nγ reduced mod 1 keeps the exponent arguments small.
    let frac = {
        let ng = Ratio::from_integer(dim as i64) * gamma.0;
        let f = ng - ng.floor();
        *f.numer() as f64 / *f.denom() as f64
    };
    let one = c64::new(1.0, 0.0);
    let numer = one - c64::from_polar(1.0, TAU * frac);
    // Toeplitz part indexed by k - l + (dim - 1).
    let kernel: Vec<c64> = (0..2 * dim - 1)
        .map(|idx| {
            let diff = idx as f64 - (n - 1.0);
            numer / (one - c64::from_polar(1.0, TAU * (diff + n * g) / n)) / n
        })
        .collect();
    let rows: Vec<c64> = phases.iter().map(|&p| c64::from_polar(1.0, p)).collect();
    Ok(Mat::from_fn(dim, dim, |k, l| {
        rows[k] * kernel[k + dim - 1 - l]
    }))
}

/// Eigenpair of a unitary matrix.
#[derive(Clone, Debug)]
pub struct UnitaryEigenpair {
    pub phase: f64,
    pub vector: StateVector,
}

const EIG_TOL: f64 = 1e-8;

/// Full eigenbasis of a unitary matrix: general complex eigensolver, then each
/// vector is renormalized and its eigenphase read off the Rayleigh quotient
/// `v†Uv`. The residual `‖Uv - e^{iθ}v‖` is checked for every pair.
pub fn eigenbasis_unitary(u: MatRef<'_, c64>) -> Result<Vec<UnitaryEigenpair>> {
    let n = u.nrows();
    if n != u.ncols() || n == 0 {
        return Err(invalid!(
            "expected a nonempty square matrix, got {}x{}",
            n,
            u.ncols()
        ));
    }
    let probe = Mat::<c64>::from_fn(n, 1, |i, _| {
        c64::from_polar(1.0, 0.37 * (i * i) as f64 + 0.11 * i as f64)
    });
    let image = u * &probe;
    let drift = (0..n).map(|i| image[(i, 0)].norm_sqr()).sum::<f64>() - n as f64;
    if drift.abs() > EIG_TOL * n as f64 {
        return Err(invalid!("matrix is not unitary (norm drift {drift:e})"));
    }

    let eig = u
        .eigen()
        .map_err(|e| Error::Numeric(format!("complex eigensolver failed: {e:?}")))?;
    let mut vecs = eig.U().to_owned();
    for j in 0..n {
        let norm = (0..n).map(|i| vecs[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Numeric(format!("eigenvector {j} has zero norm")));
        }
        for i in 0..n {
            vecs[(i, j)] /= norm;
        }
    }
    let images = u * &vecs;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let rq: c64 = (0..n).map(|i| vecs[(i, j)].conj() * images[(i, j)]).sum();
        let phase = rq.arg();
        let rot = c64::from_polar(1.0, phase);
        let residual = (0..n)
            .map(|i| (images[(i, j)] - rot * vecs[(i, j)]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > EIG_TOL {
            return Err(Error::Numeric(format!(
                "eigenpair {j} residual {residual:e} exceeds {EIG_TOL:e} (eigenvalue {:?})",
                eig.S().column_vector()[j]
            )));
        }
        let amps: Vec<Complex64> = (0..n).map(|i| vecs[(i, j)]).collect();
        out.push(UnitaryEigenpair {
            phase,
            vector: StateVector::normalized(amps)?,
        });
    }
    Ok(out)
}

/// Disorder realization parameters of
/// `H = Σ_i Γ_i σ^z_i + Σ_{i<j} J_ij σ^x_i σ^x_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManyBodySpec {
    pub n_qubits: u32,
    pub delta0: f64,
    pub disorder: f64,
    pub coupling: f64,
    pub seed: u64,
}

impl ManyBodySpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 1 {
            return Err(invalid!("need at least one qubit"));
        }
        if !(self.disorder >= 0.0) || !(self.coupling >= 0.0) {
            return Err(invalid!(
                "disorder width and coupling bound must be nonnegative (got {}, {})",
                self.disorder,
                self.coupling
            ));
        }
        Ok(())
    }

    /// Draws `Γ_i ∈ [Δ0 - δ/2, Δ0 + δ/2]` then `J_ij ∈ [-J, J]` for `i < j`
    /// in row-major order.
    pub fn draw_couplings(&self) -> Result<ManyBodyCouplings> {
        self.validate()?;
        let mut rng = seed::stream(self.seed, &[]);
        let n = self.n_qubits as usize;
        let gaps = (0..n)
            .map(|_| self.delta0 + self.disorder * (rng.random::<f64>() - 0.5))
            .collect();
        let mut pairs = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.coupling * (2.0 * rng.random::<f64>() - 1.0);
                pairs[i][j] = v;
                pairs[j][i] = v;
            }
        }
        Ok(ManyBodyCouplings { gaps, pairs })
    }
}

/// Concrete `Γ_i` and symmetric `J_ij` (diagonal ignored).
#[derive(Clone, Debug, PartialEq)]
pub struct ManyBodyCouplings {
    pub gaps: Vec<f64>,
    pub pairs: Vec<Vec<f64>>,
}

impl ManyBodyCouplings {
    pub fn hamiltonian(&self) -> Mat<f64> {
        let n = self.gaps.len();
        let dim = 1usize << n;
        let bit = |q: usize| 1usize << (n - 1 - q);
        let mut h = Mat::<f64>::zeros(dim, dim);
        for x in 0..dim {
            h[(x, x)] = (0..n)
                .map(|q| {
                    if x & bit(q) == 0 {
                        self.gaps[q]
                    } else {
                        -self.gaps[q]
                    }
                })
                .sum();
            for i in 0..n {
                for j in (i + 1)..n {
                    let y = x ^ bit(i) ^ bit(j);
                    h[(y, x)] += self.pairs[i][j];
                }
            }
        }
        h
    }
}

pub fn manybody_hamiltonian(spec: &ManyBodySpec) -> Result<Mat<f64>> {
    Ok(spec.draw_couplings()?.hamiltonian())
}

/// The `count` eigenvectors whose eigenvalue ranks straddle the middle of the
/// sorted spectrum: ranks `N/2 - count/2 .. N/2 - count/2 + count`.
pub fn central_eigenstates(h: MatRef<'_, f64>, count: usize) -> Result<Vec<StateVector>> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(invalid!("Hamiltonian must be square"));
    }
    if count == 0 || count > n {
        return Err(invalid!(
            "requested {count} central eigenstates of a {n}-level spectrum"
        ));
    }
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("symmetric eigensolver failed: {e:?}")))?;
    let start = n / 2 - count / 2;
    let u = eig.U();
    (start..start + count)
        .map(|j| StateVector::from_real(&(0..n).map(|i| u[(i, j)]).collect::<Vec<_>>()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetrizeMode {
    Shuffle,
    Phases,
    Both,
}

/// Random permutation of components, independent uniform phases, or both
/// (shuffle first).
pub fn symmetrize_state<R: Rng + ?Sized>(
    psi: &StateVector,
    mode: SymmetrizeMode,
    rng: &mut R,
) -> StateVector {
    let mut amps = psi.amplitudes.clone();
    if matches!(mode, SymmetrizeMode::Shuffle | SymmetrizeMode::Both) {
        amps.shuffle(rng);
    }
    if matches!(mode, SymmetrizeMode::Phases | SymmetrizeMode::Both) {
        for a in &mut amps {
            *a *= Complex64::from_polar(1.0, rng.random::<f64>() * TAU);
        }
    }
    StateVector {
        n_qubits: psi.n_qubits,
        amplitudes: amps,
    }
}

/// State whose squared moduli are a uniformly random permutation of `moduli`
/// and whose phases are i.i.d. uniform.
pub fn exchangeable_state<R: Rng + ?Sized>(moduli: &[f64], rng: &mut R) -> Result<StateVector> {
    check_moduli(moduli)?;
    let mut w = moduli.to_vec();
    w.shuffle(rng);
    let amps = w
        .iter()
        .map(|&x| Complex64::from_polar(x.sqrt(), rng.random::<f64>() * TAU))
        .collect();
    StateVector::normalized(amps)
}

fn check_moduli(moduli: &[f64]) -> Result<()> {
    if let Some(x) = moduli.iter().find(|x| !(**x >= 0.0)) {
        return Err(invalid!("moduli must be nonnegative, found {x}"));
    }
    let total: f64 = moduli.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(invalid!("moduli must sum to 1, got {total}"));
    }
    qubit_count(moduli.len())?;
    Ok(())
}

/// Reads one squared modulus per line; blank lines are skipped.
pub fn load_moduli_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path.as_ref())?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let Some(field) = rec.get(0) else { continue };
        let field = field.trim();
        if field.is_empty() {
            continue;
        }
        out.push(
            field
                .parse::<f64>()
                .map_err(|_| invalid!("bad modulus value {field:?}"))?,
        );
    }
    check_moduli(&out)?;
    Ok(out)
}

/// Modulus profile of an exchangeable ensemble, resolvable for any size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum ModuliProfile {
    Uniform,
    /// `x_i ∝ ratio^i`.
    Geometric {
        ratio: f64,
    },
    /// `x_i ∝ (i + 1)^(-exponent)`.
    PowerLaw {
        exponent: f64,
    },
    /// Fixed values; only valid for the matching size.
    Explicit {
        values: Vec<f64>,
    },
}

impl ModuliProfile {
    pub fn moduli(&self, dim: usize) -> Result<Vec<f64>> {
        let raw: Vec<f64> = match self {
            ModuliProfile::Uniform => vec![1.0; dim],
            ModuliProfile::Geometric { ratio } => {
                if !(*ratio > 0.0) {
                    return Err(invalid!("geometric ratio must be positive"));
                }
                (0..dim).map(|i| ratio.powi(i as i32)).collect()
            }
            ModuliProfile::PowerLaw { exponent } => {
                (0..dim).map(|i| ((i + 1) as f64).powf(-exponent)).collect()
            }
            ModuliProfile::Explicit { values } => {
                if values.len() != dim {
                    return Err(invalid!(
                        "explicit moduli have length {}, size {dim} requested",
                        values.len()
                    ));
                }
                check_moduli(values)?;
                return Ok(values.clone());
            }
        };
        let total: f64 = raw.iter().sum();
        Ok(raw.into_iter().map(|x| x / total).collect())
    }
}

/// Identity and parameters of an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    Cue,
    Intermediate {
        gamma: Gamma,
        /// Eigenvectors kept per matrix; all of them when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vectors_per_realization: Option<usize>,
    },
    Manybody {
        delta0: f64,
        disorder: f64,
        coupling: f64,
        /// Central eigenstates kept per disorder realization; `max(N/16, 1)`
        /// when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        states_per_realization: Option<usize>,
    },
    Exchangeable {
        #[serde(flatten)]
        profile: ModuliProfile,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Postprocess {
    #[serde(default)]
    pub shuffle: bool,
    #[serde(default)]
    pub randomize_phases: bool,
}

impl Postprocess {
    fn mode(self) -> Option<SymmetrizeMode> {
        match (self.shuffle, self.randomize_phases) {
            (false, false) => None,
            (true, false) => Some(SymmetrizeMode::Shuffle),
            (false, true) => Some(SymmetrizeMode::Phases),
            (true, true) => Some(SymmetrizeMode::Both),
        }
    }
}

/// Full description of a sample stream: identical specs yield identical
/// streams.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    #[serde(default)]
    pub postprocess: Postprocess,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn cue(seed: u64) -> Self {
        Self {
            kind: EnsembleKind::Cue,
            postprocess: Postprocess::default(),
            seed,
        }
    }

    /// Intermediate ensemble with component shuffling on.
    pub fn intermediate(gamma: Gamma, seed: u64) -> Self {
        Self {
            kind: EnsembleKind::Intermediate {
                gamma,
                vectors_per_realization: None,
            },
            postprocess: Postprocess {
                shuffle: true,
                randomize_phases: false,
            },
            seed,
        }
    }

    /// Many-body ensemble with component shuffling on and phases untouched.
    pub fn manybody(delta0: f64, disorder: f64, coupling: f64, seed: u64) -> Self {
        Self {
            kind: EnsembleKind::Manybody {
                delta0,
                disorder,
                coupling,
                states_per_realization: None,
            },
            postprocess: Postprocess {
                shuffle: true,
                randomize_phases: false,
            },
            seed,
        }
    }

    pub fn exchangeable(profile: ModuliProfile, seed: u64) -> Self {
        Self {
            kind: EnsembleKind::Exchangeable { profile },
            postprocess: Postprocess::default(),
            seed,
        }
    }

    /// Checks that the ensemble is well defined at this size.
    pub fn validate_for(&self, n_qubits: u32) -> Result<()> {
        if n_qubits < 2 {
            return Err(invalid!("need at least two qubits, got {n_qubits}"));
        }
        let dim = 1usize << n_qubits;
        match &self.kind {
            EnsembleKind::Cue => Ok(()),
            EnsembleKind::Intermediate {
                gamma,
                vectors_per_realization,
            } => {
                IntermediateSpec {
                    dim,
                    gamma: *gamma,
                    seed: 0,
                }
                .validate()?;
                match vectors_per_realization {
                    Some(v) if *v == 0 || *v > dim => {
                        Err(invalid!("vectors_per_realization must be in 1..={dim}"))
                    }
                    _ => Ok(()),
                }
            }
            EnsembleKind::Manybody {
                states_per_realization,
                disorder,
                coupling,
                delta0,
            } => {
                ManyBodySpec {
                    n_qubits,
                    delta0: *delta0,
                    disorder: *disorder,
                    coupling: *coupling,
                    seed: 0,
                }
                .validate()?;
                match states_per_realization {
                    Some(v) if *v == 0 || *v > dim => {
                        Err(invalid!("states_per_realization must be in 1..={dim}"))
                    }
                    _ => Ok(()),
                }
            }
            EnsembleKind::Exchangeable { profile } => profile.moduli(dim).map(|_| ()),
        }
    }

    /// Number of states contributed by each realization.
    pub fn batch_size(&self, n_qubits: u32) -> usize {
        let dim = 1usize << n_qubits;
        match &self.kind {
            EnsembleKind::Cue | EnsembleKind::Exchangeable { .. } => 1,
            EnsembleKind::Intermediate {
                vectors_per_realization,
                ..
            } => vectors_per_realization.unwrap_or(dim),
            EnsembleKind::Manybody {
                states_per_realization,
                ..
            } => states_per_realization.unwrap_or((dim / 16).max(1)),
        }
    }

    /// States of realization `index` at size `n_qubits`. All randomness comes
    /// from the stream `(seed; n_qubits, index)`.
    pub fn realization(&self, n_qubits: u32, index: u64) -> Result<Vec<StateVector>> {
        let dim = 1usize << n_qubits;
        let mut rng = seed::stream(self.seed, &[n_qubits as u64, index]);
        let raw = match &self.kind {
            EnsembleKind::Cue => vec![sample_cue_state(n_qubits, &mut rng)?],
            EnsembleKind::Exchangeable { profile } => {
                vec![exchangeable_state(&profile.moduli(dim)?, &mut rng)?]
            }
            EnsembleKind::Intermediate { gamma, .. } => {
                let spec = IntermediateSpec {
                    dim,
                    gamma: *gamma,
                    seed: rng.random(),
                };
                let u = intermediate_matrix(&spec)?;
                eigenbasis_unitary(u.as_ref())?
                    .into_iter()
                    .take(self.batch_size(n_qubits))
                    .map(|p| p.vector)
                    .collect()
            }
            EnsembleKind::Manybody {
                delta0,
                disorder,
                coupling,
                ..
            } => {
                let spec = ManyBodySpec {
                    n_qubits,
                    delta0: *delta0,
                    disorder: *disorder,
                    coupling: *coupling,
                    seed: rng.random(),
                };
                let h = manybody_hamiltonian(&spec)?;
                central_eigenstates(h.as_ref(), self.batch_size(n_qubits))?
            }
        };
        Ok(match self.postprocess.mode() {
            None => raw,
            Some(mode) => raw
                .iter()
                .map(|psi| symmetrize_state(psi, mode, &mut rng))
                .collect(),
        })
    }

    /// The first `count` states of the stream at size `n_qubits`.
    pub fn samples(&self, n_qubits: u32, count: usize) -> Result<Vec<StateVector>> {
        self.validate_for(n_qubits)?;
        let mut out = Vec::with_capacity(count);
        let mut index = 0u64;
        while out.len() < count {
            let batch = self.realization(n_qubits, index)?;
            let need = count - out.len();
            out.extend(batch.into_iter().take(need));
            index += 1;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream;

    fn max_unitarity_defect(u: MatRef<'_, c64>) -> f64 {
        let prod = u.adjoint() * u;
        let n = u.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - c64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    #[test]
    fn state_constructors() {
        assert!(StateVector::new(vec![Complex64::new(1.0, 0.0); 3]).is_err());
        assert!(StateVector::new(vec![Complex64::new(1.0, 0.0); 2]).is_err());
        let b = StateVector::basis(3, 5).unwrap();
        assert_eq!(b.dim(), 8);
        assert_eq!(b.probabilities()[5], 1.0);
        assert!(StateVector::basis(2, 4).is_err());
        assert!((StateVector::uniform(4).norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cue_states_are_normalized() {
        let mut rng = stream(1, &[]);
        for _ in 0..50 {
            let s = sample_cue_state(5, &mut rng).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_parsing() {
        let g: Gamma = "1/3".parse().unwrap();
        assert_eq!(g.to_string(), "1/3");
        assert!(!g.is_degenerate_for(16));
        assert!("1/2".parse::<Gamma>().unwrap().is_degenerate_for(16));
        assert!("0.33".parse::<Gamma>().is_err());
        assert!("1/0".parse::<Gamma>().is_err());
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, "\"1/3\"");
    }

    #[test]
    fn intermediate_diagonal_modulus() {
        let spec = IntermediateSpec {
            dim: 4,
            gamma: "1/3".parse().unwrap(),
            seed: 3,
        };
        let u = intermediate_matrix(&spec).unwrap();
        for k in 0..4 {
            assert!((u[(k, k)].norm() - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn intermediate_entry_with_zero_phases() {
        let u = intermediate_matrix_with_phases(2, "1/4".parse().unwrap(), &[0.0, 0.0]).unwrap();
        assert!((u[(0, 0)] - c64::new(0.5, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn intermediate_is_unitary() {
        for n_qubits in 2..=10u32 {
            for gamma in ["1/3", "1/7"] {
                let spec = IntermediateSpec {
                    dim: 1 << n_qubits,
                    gamma: gamma.parse().unwrap(),
                    seed: n_qubits as u64,
                };
                let u = intermediate_matrix(&spec).unwrap();
                let defect = max_unitarity_defect(u.as_ref());
                assert!(defect < 1e-10, "n_r={n_qubits} gamma={gamma}: {defect:e}");
            }
        }
    }

    #[test]
    fn degenerate_gamma_is_rejected() {
        let spec = IntermediateSpec {
            dim: 16,
            gamma: "1/2".parse().unwrap(),
            seed: 0,
        };
        assert!(matches!(
            intermediate_matrix(&spec),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn eigenbasis_of_identity_and_swap() {
        let id = Mat::<c64>::identity(4, 4);
        let pairs = eigenbasis_unitary(id.as_ref()).unwrap();
        assert!(pairs.iter().all(|p| p.phase.abs() < 1e-12));

        let x = Mat::<c64>::from_fn(2, 2, |i, j| c64::new(if i != j { 1.0 } else { 0.0 }, 0.0));
        let pairs = eigenbasis_unitary(x.as_ref()).unwrap();
        let mut phases: Vec<f64> = pairs.iter().map(|p| p.phase.abs()).collect();
        phases.sort_by(f64::total_cmp);
        assert!(phases[0].abs() < 1e-12);
        assert!((phases[1] - std::f64::consts::PI).abs() < 1e-12);
        for p in &pairs {
            let a = p.vector.amplitudes();
            let ratio = a[1] / a[0];
            let expected = if p.phase.abs() < 1.0 { 1.0 } else { -1.0 };
            assert!((ratio - c64::new(expected, 0.0)).norm() < 1e-12);
            assert!((a[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenbasis_of_intermediate_matrix() {
        let spec = IntermediateSpec {
            dim: 64,
            gamma: "1/7".parse().unwrap(),
            seed: 11,
        };
        let u = intermediate_matrix(&spec).unwrap();
        let pairs = eigenbasis_unitary(u.as_ref()).unwrap();
        assert_eq!(pairs.len(), 64);
        for a in 0..64 {
            for b in 0..64 {
                let ip: Complex64 = pairs[a]
                    .vector
                    .amplitudes()
                    .iter()
                    .zip(pairs[b].vector.amplitudes())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((ip - Complex64::new(target, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn non_unitary_input_is_rejected() {
        let m = Mat::<c64>::from_fn(3, 3, |i, j| c64::new((i + j) as f64, 0.0));
        assert!(eigenbasis_unitary(m.as_ref()).is_err());
    }

    #[test]
    fn hamiltonian_without_coupling() {
        let c = ManyBodyCouplings {
            gaps: vec![0.7, 1.3],
            pairs: vec![vec![0.0; 2]; 2],
        };
        let h = c.hamiltonian();
        let diag: Vec<f64> = (0..4).map(|i| h[(i, i)]).collect();
        assert_eq!(diag, vec![2.0, 0.7 - 1.3, -0.7 + 1.3, -2.0]);
    }

    #[test]
    fn hamiltonian_structure() {
        let spec = ManyBodySpec {
            n_qubits: 5,
            delta0: 1.0,
            disorder: 1.0,
            coupling: 1.5,
            seed: 9,
        };
        let c = spec.draw_couplings().unwrap();
        for &g in &c.gaps {
            assert!((0.5..=1.5).contains(&g));
        }
        let h = c.hamiltonian();
        let mut trace = 0.0;
        for i in 0..32 {
            trace += h[(i, i)];
            for j in 0..32 {
                assert_eq!(h[(i, j)], h[(j, i)]);
            }
        }
        assert!(trace.abs() < 1e-12);
        // σx_0 σx_1 connects |00000⟩ and |11000⟩.
        assert_eq!(h[(0b11000, 0)], c.pairs[0][1]);
    }

    #[test]
    fn central_eigenstate_window() {
        let spec = ManyBodySpec {
            n_qubits: 4,
            delta0: 1.0,
            disorder: 1.0,
            coupling: 1.5,
            seed: 2,
        };
        let h = manybody_hamiltonian(&spec).unwrap();
        let single = central_eigenstates(h.as_ref(), 1).unwrap();
        let all = central_eigenstates(h.as_ref(), 16).unwrap();
        assert_eq!(all.len(), 16);
        // Rank 8 of 16 is the single central state.
        let overlap: Complex64 = single[0]
            .amplitudes()
            .iter()
            .zip(all[8].amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-8);
        for a in 0..16 {
            for b in 0..16 {
                let ip: Complex64 = all[a]
                    .amplitudes()
                    .iter()
                    .zip(all[b].amplitudes())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((ip.re - target).abs() < 1e-8 && ip.im.abs() < 1e-8);
            }
        }
        assert!(central_eigenstates(h.as_ref(), 17).is_err());
        assert!(central_eigenstates(h.as_ref(), 0).is_err());
    }

    #[test]
    fn symmetrization_preserves_moduli() {
        let mut rng = stream(5, &[]);
        let psi = sample_cue_state(4, &mut rng).unwrap();
        let mut before = psi.probabilities();
        before.sort_by(f64::total_cmp);

        let shuffled = symmetrize_state(&psi, SymmetrizeMode::Shuffle, &mut rng);
        let mut after = shuffled.probabilities();
        after.sort_by(f64::total_cmp);
        assert_eq!(before, after);

        let phased = symmetrize_state(&psi, SymmetrizeMode::Phases, &mut rng);
        for (a, b) in psi.amplitudes().iter().zip(phased.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        let both = symmetrize_state(&psi, SymmetrizeMode::Both, &mut rng);
        assert!((both.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exchangeable_states() {
        let mut rng = stream(8, &[]);
        let mut basis = vec![0.0; 8];
        basis[0] = 1.0;
        let s = exchangeable_state(&basis, &mut rng).unwrap();
        assert_eq!(s.probabilities().iter().filter(|&&p| p > 0.5).count(), 1);
        assert!(exchangeable_state(&[0.5, 0.6, -0.1, 0.0], &mut rng).is_err());
        assert!(exchangeable_state(&[0.5, 0.1, 0.1, 0.1], &mut rng).is_err());
    }

    #[test]
    fn profiles_resolve() {
        for profile in [
            ModuliProfile::Uniform,
            ModuliProfile::Geometric { ratio: 0.8 },
            ModuliProfile::PowerLaw { exponent: 1.2 },
        ] {
            let m = profile.moduli(32).unwrap();
            assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let explicit = ModuliProfile::Explicit {
            values: vec![0.5, 0.25, 0.125, 0.125],
        };
        assert!(explicit.moduli(4).is_ok());
        assert!(explicit.moduli(8).is_err());
    }

    #[test]
    fn moduli_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "0.5\n0.25\n\n0.125\n0.125\n").unwrap();
        assert_eq!(
            load_moduli_csv(&path).unwrap(),
            vec![0.5, 0.25, 0.125, 0.125]
        );
        std::fs::write(&path, "0.5\n0.25\n").unwrap();
        assert!(load_moduli_csv(&path).is_err());
    }

    #[test]
    fn spec_json_roundtrip() {
        let specs = [
            EnsembleSpec::cue(1),
            EnsembleSpec::intermediate("1/3".parse().unwrap(), 2),
            EnsembleSpec::manybody(1.0, 1.0, 1.5, 3),
            EnsembleSpec::exchangeable(ModuliProfile::Geometric { ratio: 0.9 }, 4),
        ];
        for s in specs {
            let json = serde_json::to_string(&s).unwrap();
            let back: EnsembleSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, s, "{json}");
        }
        let parsed: EnsembleSpec =
            serde_json::from_str(r#"{"kind":"intermediate","gamma":"1/7","seed":5}"#).unwrap();
        assert_eq!(parsed.batch_size(6), 64);
        assert!(!parsed.postprocess.shuffle);
    }

    #[test]
    fn streams_are_deterministic() {
        let spec = EnsembleSpec::intermediate("1/3".parse().unwrap(), 17);
        let a = spec.samples(4, 40).unwrap();
        let b = spec.samples(4, 40).unwrap();
        assert_eq!(a, b);
        let other = EnsembleSpec::intermediate("1/3".parse().unwrap(), 18);
        assert_ne!(other.samples(4, 40).unwrap(), a);
        assert!(a.iter().all(|s| (s.norm_sqr() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn manybody_batches() {
        let spec = EnsembleSpec::manybody(1.0, 1.0, 1.5, 4);
        assert_eq!(spec.batch_size(4), 1);
        assert_eq!(spec.batch_size(8), 16);
        let states = spec.realization(6, 0).unwrap();
        assert_eq!(states.len(), 4);
        // Eigenvectors are real and shuffling keeps them real.
        assert!(states[0].amplitudes().iter().all(|a| a.im == 0.0));
    }
}
