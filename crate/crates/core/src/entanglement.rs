//! Bipartite entanglement of pure qubit states.

use std::f64::consts::LN_2;

use faer::{c64, Mat, MatRef, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::StateVector;
use crate::error::{invalid, Error, Result};

/// Eigenvalues of ρ_A down to this value are clipped to zero.
pub const EIGENVALUE_CLIP: f64 = 1e-12;

/// A split of `n_qubits` qubits into subsystem A (`subset`) and the rest.
///
/// Qubit 0 is the most significant index bit. A must not be larger than its
/// complement.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    n_qubits: u32,
    subset: Vec<u32>,
}

impl Bipartition {
    pub fn new(n_qubits: u32, mut subset: Vec<u32>) -> Result<Self> {
        subset.sort_unstable();
        subset.dedup();
        if let Some(q) = subset.iter().find(|&&q| q >= n_qubits) {
            return Err(invalid!("qubit {q} out of range for {n_qubits} qubits"));
        }
        let nu = subset.len() as u32;
        if nu < 1 || nu > n_qubits - nu {
            return Err(invalid!(
                "subsystem of {nu} qubits out of {n_qubits} must satisfy 1 <= nu <= n_r - nu"
            ));
        }
        Ok(Self { n_qubits, subset })
    }

    /// The `nu` most significant qubits against the rest.
    pub fn leading(n_qubits: u32, nu: u32) -> Result<Self> {
        Self::new(n_qubits, (0..nu).collect())
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn subset(&self) -> &[u32] {
        &self.subset
    }

    /// ν, the number of qubits in A.
    pub fn nu(&self) -> u32 {
        self.subset.len() as u32
    }

    /// d = 2^ν.
    pub fn subsystem_dim(&self) -> usize {
        1 << self.nu()
    }

    fn check(&self, psi: &StateVector) -> Result<()> {
        if psi.n_qubits() != self.n_qubits {
            return Err(invalid!(
                "bipartition is for {} qubits, state has {}",
                self.n_qubits,
                psi.n_qubits()
            ));
        }
        Ok(())
    }

    /// (A index, B index) of a computational index, both MSB first.
    fn split_index(&self, index: usize) -> (usize, usize) {
        let n = self.n_qubits;
        let (mut a, mut b) = (0usize, 0usize);
        let mut next_a = 0;
        for q in 0..n {
            let bit = (index >> (n - 1 - q)) & 1;
            if next_a < self.subset.len() && self.subset[next_a] == q {
                a = (a << 1) | bit;
                next_a += 1;
            } else {
                b = (b << 1) | bit;
            }
        }
        (a, b)
    }
}

/// The 2^ν vectors `ψ^{(j)}` of length 2^{n_r-ν}, indexed by the bit pattern of
/// subsystem A.
pub fn split_state(psi: &StateVector, b: &Bipartition) -> Result<Vec<Vec<Complex64>>> {
    b.check(psi)?;
    let d = b.subsystem_dim();
    let rest = psi.dim() / d;
    let mut out = vec![vec![Complex64::new(0.0, 0.0); rest]; d];
    for (idx, &amp) in psi.amplitudes().iter().enumerate() {
        let (j, c) = b.split_index(idx);
        out[j][c] = amp;
    }
    Ok(out)
}

/// Reduced density matrix of a pure state; Hermitian with unit trace.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: Mat<c64>,
}

impl DensityMatrix {
    /// Validates hermiticity and unit trace to 1e-12.
    pub fn new(mat: Mat<c64>) -> Result<Self> {
        let d = mat.nrows();
        if d == 0 || d != mat.ncols() {
            return Err(Error::InvalidDensityMatrix("matrix must be square".into()));
        }
        let mut trace = 0.0;
        for i in 0..d {
            trace += mat[(i, i)].re;
            for j in 0..d {
                if (mat[(i, j)] - mat[(j, i)].conj()).norm() > 1e-12 {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "not Hermitian at ({i},{j})"
                    )));
                }
            }
        }
        if (trace - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("trace is {trace}")));
        }
        Ok(Self { mat })
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        let d = values.len();
        Self::new(Mat::from_fn(d, d, |i, j| {
            c64::new(if i == j { values[i] } else { 0.0 }, 0.0)
        }))
    }

    /// The maximally mixed state 1/d.
    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: Mat::from_fn(d, d, |i, j| {
                c64::new(if i == j { 1.0 / d as f64 } else { 0.0 }, 0.0)
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += self.mat[(i, j)].norm_sqr();
            }
        }
        acc
    }

    /// Determinant of a single-qubit reduced matrix.
    fn det2(&self) -> f64 {
        let m = &self.mat;
        (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re
    }

    /// Spectrum in nondecreasing order. Values in `[-1e-12, 0)` are clipped
    /// to zero; anything more negative is an error.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut ev = self
            .mat
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numeric(format!("density matrix eigensolver failed: {e:?}")))?;
        for v in &mut ev {
            if *v < -EIGENVALUE_CLIP {
                return Err(Error::InvalidDensityMatrix(format!(
                    "negative eigenvalue {v:e}"
                )));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(ev)
    }
}

/// `ρ_A[i,j] = ⟨ψ^{(j)}|ψ^{(i)}⟩`, the Gram matrix of the split vectors.
pub fn reduced_density_matrix(psi: &StateVector, b: &Bipartition) -> Result<DensityMatrix> {
    let parts = split_state(psi, b)?;
    let d = parts.len();
    let mut mat = Mat::<c64>::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v: c64 = parts[i]
                .iter()
                .zip(&parts[j])
                .map(|(x, y)| x * y.conj())
                .sum();
            mat[(i, j)] = v;
            mat[(j, i)] = v.conj();
        }
    }
    for i in 0..d {
        mat[(i, i)].im = 0.0;
    }
    Ok(DensityMatrix { mat })
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `-tr ρ log₂ ρ` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(-rho.eigenvalues()?.into_iter().map(xlog2x).sum::<f64>())
}

/// `d/(d-1) (1 - tr ρ_A²)`.
pub fn linear_entropy(psi: &StateVector, b: &Bipartition) -> Result<f64> {
    let rho = reduced_density_matrix(psi, b)?;
    Ok(linear_entropy_of(&rho))
}

pub fn linear_entropy_of(rho: &DensityMatrix) -> f64 {
    let d = rho.dim() as f64;
    (d / (d - 1.0) * (1.0 - rho.purity())).clamp(0.0, 1.0)
}

/// `4 det ρ_A` for qubit `qubit` against the rest.
pub fn tangle(psi: &StateVector, qubit: u32) -> Result<f64> {
    let b = Bipartition::new(psi.n_qubits(), vec![qubit])?;
    Ok(tangle_of(&reduced_density_matrix(psi, &b)?))
}

/// Tangle of a 2×2 reduced density matrix.
pub fn tangle_of(rho: &DensityMatrix) -> f64 {
    debug_assert_eq!(rho.dim(), 2);
    (4.0 * rho.det2()).clamp(0.0, 1.0)
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    -xlog2x(x) - xlog2x(1.0 - x)
}

/// Exact entropy of a single qubit with tangle τ: `h((1 + √(1-τ))/2)`.
pub fn entropy_from_tangle(tau: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&tau) {
        return Err(invalid!("tangle {tau} outside [0, 1]"));
    }
    let tau = tau.clamp(0.0, 1.0);
    Ok(binary_entropy((1.0 + (1.0 - tau).sqrt()) / 2.0))
}

/// `S_m(τ) = 1 - (1/ln 2) Σ_{n=1}^{m} (1-τ)^n / (2n(2n-1))`.
pub fn truncated_entropy_series(tau: f64, m: u32) -> f64 {
    let x = 1.0 - tau;
    let mut pow = 1.0;
    let mut acc = 0.0;
    for n in 1..=m {
        pow *= x;
        let n = n as f64;
        acc += pow / (2.0 * n * (2.0 * n - 1.0));
    }
    1.0 - acc / LN_2
}

/// Truncation of the expansion of S around `ρ_0 = 1/2^ν`:
/// `ν + (1/ln 2) Σ_{n=1}^{order} (-2^ν)^n / (n(n+1)) tr((ρ-ρ_0)^{n+1})`,
/// with traces taken on the exact spectrum.
pub fn entropy_expansion_mixed(rho: &DensityMatrix, order: u32) -> Result<f64> {
    let d = rho.dim() as f64;
    let nu = d.log2();
    let shifted: Vec<f64> = rho
        .eigenvalues()?
        .into_iter()
        .map(|l| l - 1.0 / d)
        .collect();
    let mut acc = 0.0;
    let mut pows = shifted.clone();
    let mut coef = 1.0;
    for n in 1..=order {
        for (p, s) in pows.iter_mut().zip(&shifted) {
            *p *= s;
        }
        coef *= -d;
        let trace: f64 = pows.iter().sum();
        let n = n as f64;
        acc += coef / (n * (n + 1.0)) * trace;
    }
    Ok(nu + acc / LN_2)
}

/// Whether every eigenvalue satisfies `|2^ν λ - 1| < 1`, the condition under
/// which [`entropy_expansion_mixed`] converges as the order grows.
pub fn mixed_expansion_converges(rho: &DensityMatrix) -> Result<bool> {
    let d = rho.dim() as f64;
    Ok(rho
        .eigenvalues()?
        .iter()
        .all(|&l| (d * l - 1.0).abs() < 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap()
    }

    fn skewed() -> StateVector {
        StateVector::new(vec![c(3f64.sqrt() / 2.0), c(0.0), c(0.0), c(0.5)]).unwrap()
    }

    #[test]
    fn bipartition_validation() {
        assert!(Bipartition::leading(4, 2).is_ok());
        assert!(Bipartition::leading(4, 3).is_err());
        assert!(Bipartition::leading(4, 0).is_err());
        assert!(Bipartition::new(4, vec![5]).is_err());
        assert_eq!(
            Bipartition::new(6, vec![3, 1, 1]).unwrap().subset(),
            &[1, 3]
        );
    }

    #[test]
    fn split_follows_msb_convention() {
        let psi = StateVector::normalized(vec![c(1.0), c(2.0), c(3.0), c(4.0)]).unwrap();
        let parts = split_state(&psi, &Bipartition::leading(2, 1).unwrap()).unwrap();
        let a = psi.amplitudes();
        assert_eq!(parts, vec![vec![a[0], a[1]], vec![a[2], a[3]]]);

        let parts = split_state(&bell(), &Bipartition::leading(2, 1).unwrap()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(parts, vec![vec![c(s), c(0.0)], vec![c(0.0), c(s)]]);

        // Second qubit as subsystem A.
        let parts = split_state(&psi, &Bipartition::new(2, vec![1]).unwrap()).unwrap();
        assert_eq!(parts, vec![vec![a[0], a[2]], vec![a[1], a[3]]]);
    }

    #[test]
    fn reduced_matrices() {
        let b = Bipartition::leading(2, 1).unwrap();
        let rho = reduced_density_matrix(&bell(), &b).unwrap();
        assert!((rho.as_mat()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(rho.as_mat()[(0, 1)].norm() < 1e-15);

        let plus = StateVector::normalized(vec![c(1.0); 4]).unwrap();
        let rho = reduced_density_matrix(&plus, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho.as_mat()[(i, j)].re - 0.5).abs() < 1e-15);
            }
        }
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropies_of_simple_states() {
        let b = Bipartition::leading(2, 1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
        let pure = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
        let d = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        assert!((von_neumann_entropy(&d).unwrap() - 0.811278).abs() < 1e-6);

        assert!((linear_entropy(&bell(), &b).unwrap() - 1.0).abs() < 1e-12);
        let product = StateVector::basis(2, 0).unwrap();
        assert!(linear_entropy(&product, &b).unwrap().abs() < 1e-12);
        assert!((linear_entropy(&skewed(), &b).unwrap() - 0.75).abs() < 1e-12);

        assert!((tangle(&bell(), 0).unwrap() - 1.0).abs() < 1e-12);
        assert!(tangle(&product, 0).unwrap().abs() < 1e-12);
        assert!((tangle(&skewed(), 0).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn negative_spectrum_is_rejected() {
        let bad = DensityMatrix::from_diagonal(&[1.1, -0.1]).unwrap();
        assert!(matches!(
            von_neumann_entropy(&bad),
            Err(Error::InvalidDensityMatrix(_))
        ));
        let tiny = DensityMatrix::from_diagonal(&[1.0 + 5e-13, -5e-13]).unwrap();
        assert!(von_neumann_entropy(&tiny).is_ok());
        assert!(DensityMatrix::from_diagonal(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn tangle_entropy_relation() {
        assert!((entropy_from_tangle(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(entropy_from_tangle(0.0).unwrap().abs() < 1e-15);
        assert!((entropy_from_tangle(0.75).unwrap() - 0.811278).abs() < 1e-6);
        assert!(entropy_from_tangle(1.1).is_err());
        assert!(entropy_from_tangle(-0.1).is_err());
    }

    #[test]
    fn series_values() {
        assert!((truncated_entropy_series(1.0, 5) - 1.0).abs() < 1e-15);
        assert!((truncated_entropy_series(0.0, 1) - 0.278652).abs() < 1e-6);
        assert!((truncated_entropy_series(0.75, 2) - 0.812149).abs() < 1e-6);
    }

    #[test]
    fn mixed_expansion_values() {
        for nu in 1..=3 {
            let d = 1 << nu;
            let rho0 = DensityMatrix::maximally_mixed(d);
            for order in 1..6 {
                assert!((entropy_expansion_mixed(&rho0, order).unwrap() - nu as f64).abs() < 1e-12);
            }
        }
        let d = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        assert!((entropy_expansion_mixed(&d, 4).unwrap() - 0.812149).abs() < 1e-6);
        let d = DensityMatrix::from_diagonal(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!((entropy_expansion_mixed(&d, 2).unwrap() - 1.855730).abs() < 1e-6);
        assert!((von_neumann_entropy(&d).unwrap() - 1.846439).abs() < 1e-6);
        assert!(mixed_expansion_converges(&d).unwrap());
        let edge = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(!mixed_expansion_converges(&edge).unwrap());
    }
}
