//! Moment-based predictions for ensemble-averaged entanglement.
//!
//! Inputs are ensemble means `⟨p_λ⟩`; `N` is the state length and `ν` the
//! number of qubits in subsystem A.

use std::f64::consts::LN_2;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::partitions::{
    correlator_from_moments, tangle_power_coefficients_with_cap, Partition, PowerSumMoments,
    DEFAULT_MAX_TANGLE_POWER,
};

const RANGE_TOL: f64 = 1e-12;

fn check_dim(n_dim: u64) -> Result<()> {
    if n_dim < 4 || n_dim % 2 != 0 {
        return Err(invalid!("N must be even and at least 4, got {n_dim}"));
    }
    Ok(())
}

fn check_p2(n_dim: u64, p2: f64) -> Result<()> {
    let lo = 1.0 / n_dim as f64;
    if !(p2 >= lo - RANGE_TOL && p2 <= 1.0 + RANGE_TOL) {
        return Err(invalid!("<p2> = {p2} outside [1/N, 1] for N = {n_dim}"));
    }
    Ok(())
}

fn check_nu(n_dim: u64, nu: u32) -> Result<()> {
    if !n_dim.is_power_of_two() {
        return Err(invalid!("N = {n_dim} is not a power of two"));
    }
    let n_qubits = n_dim.trailing_zeros();
    if nu < 1 || 2 * nu > n_qubits {
        return Err(invalid!(
            "nu = {nu} invalid for {n_qubits} qubits (need 1 <= nu <= n_r - nu)"
        ));
    }
    Ok(())
}

fn moment(moments: &impl PowerSumMoments, parts: &[u32]) -> Result<f64> {
    let key = Partition::new(parts.to_vec())?;
    moments
        .power_sum_mean(&key)
        .ok_or_else(|| Error::MissingData(format!("moment <p_{key}> required")))
}

/// Checks `⟨p_2⟩ ∈ [1/N, 1]` and `⟨p_4⟩ ≤ ⟨p_3⟩ ≤ ⟨p_2⟩` for whichever of
/// these entries are present.
pub fn check_admissible(n_dim: u64, moments: &impl PowerSumMoments) -> Result<()> {
    let get = |q: u32| moments.power_sum_mean(&Partition::new(vec![q]).expect("q >= 1"));
    if let Some(p2) = get(2) {
        check_p2(n_dim, p2)?;
        if let Some(p3) = get(3) {
            if p3 > p2 + RANGE_TOL {
                return Err(invalid!("<p3> = {p3} exceeds <p2> = {p2}"));
            }
            if let Some(p4) = get(4) {
                if p4 > p3 + RANGE_TOL {
                    return Err(invalid!("<p4> = {p4} exceeds <p3> = {p3}"));
                }
            }
        }
    }
    Ok(())
}

/// `⟨τ⟩ = (N-2)/(N-1) (1 - ⟨p_2⟩)`.
pub fn mean_tangle_pred(n_dim: u64, p2: f64) -> Result<f64> {
    check_dim(n_dim)?;
    check_p2(n_dim, p2)?;
    let n = n_dim as f64;
    Ok(((n - 2.0) / (n - 1.0) * (1.0 - p2)).clamp(0.0, 1.0))
}

/// `⟨S_L⟩ = (N - 2^ν)(1 - ⟨p_2⟩)/(N - 1)`.
pub fn mean_linear_entropy_pred(n_dim: u64, nu: u32, p2: f64) -> Result<f64> {
    check_dim(n_dim)?;
    check_nu(n_dim, nu)?;
    check_p2(n_dim, p2)?;
    let n = n_dim as f64;
    let d = (1u64 << nu) as f64;
    Ok(((n - d) * (1.0 - p2) / (n - 1.0)).clamp(0.0, 1.0))
}

/// First-order mean entropy:
/// `ν - (2^ν - 1)/(2 ln 2) · (1 - (N - 2^ν)/(N - 1) · (1 - ⟨p_2⟩))`.
pub fn first_order_entropy_pred(n_dim: u64, nu: u32, p2: f64) -> Result<f64> {
    let sl = mean_linear_entropy_pred(n_dim, nu, p2)?;
    Ok(first_order_from_linear_entropy(nu, sl))
}

/// `ν - (2^ν - 1)(1 - S_L)/(2 ln 2)`.
pub fn first_order_from_linear_entropy(nu: u32, linear_entropy: f64) -> f64 {
    let d = (1u64 << nu) as f64;
    nu as f64 - (d - 1.0) / (2.0 * LN_2) * (1.0 - linear_entropy)
}

/// The three correlators entering `⟨τ²⟩`, in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourPointCorrelators {
    pub c22: f64,
    pub c211: f64,
    pub c1111: f64,
}

pub fn four_point_correlators(
    n_dim: u64,
    moments: &impl PowerSumMoments,
) -> Result<FourPointCorrelators> {
    let n = n_dim as f64;
    let p2 = moment(moments, &[2])?;
    let p3 = moment(moments, &[3])?;
    let p4 = moment(moments, &[4])?;
    let p22 = moment(moments, &[2, 2])?;
    Ok(FourPointCorrelators {
        c22: (p22 - p4) / (n * (n - 1.0)),
        c211: (p2 - p22 - 2.0 * p3 + 2.0 * p4) / (n * (n - 1.0) * (n - 2.0)),
        c1111: (1.0 - 6.0 * p2 + 8.0 * p3 + 3.0 * p22 - 6.0 * p4)
            / (n * (n - 1.0) * (n - 2.0) * (n - 3.0)),
    })
}

/// `⟨τ²⟩ = N(N-2)(N²-6N+16) c_1111 + 4N(N-2)(N-4) c_211 + 4N(N-2) c_22`.
pub fn mean_tangle_sq_pred(n_dim: u64, moments: &impl PowerSumMoments) -> Result<f64> {
    check_dim(n_dim)?;
    check_admissible(n_dim, moments)?;
    let c = four_point_correlators(n_dim, moments)?;
    let n = n_dim as f64;
    Ok(n * (n - 2.0) * (n * n - 6.0 * n + 16.0) * c.c1111
        + 4.0 * n * (n - 2.0) * (n - 4.0) * c.c211
        + 4.0 * n * (n - 2.0) * c.c22)
}

/// `⟨τⁿ⟩ = Σ_{λ ⊢ 2n} T_λ(n, N) c_λ` with exact integer coefficients and
/// correlators reconstructed from the moments.
pub fn mean_tangle_power_pred(n: u32, n_dim: u64, moments: &impl PowerSumMoments) -> Result<f64> {
    mean_tangle_power_pred_with_cap(n, n_dim, moments, DEFAULT_MAX_TANGLE_POWER)
}

pub fn mean_tangle_power_pred_with_cap(
    n: u32,
    n_dim: u64,
    moments: &impl PowerSumMoments,
    max_power: u32,
) -> Result<f64> {
    check_admissible(n_dim, moments)?;
    let table = tangle_power_coefficients_with_cap(n, n_dim, max_power)?;
    let mut acc = 0.0;
    for (lambda, coef) in table.iter() {
        let c = correlator_from_moments(lambda, moments, n_dim)?;
        acc += coef.to_f64().expect("coefficient representable as f64") * c;
    }
    Ok(acc)
}

/// Which `⟨p_2²⟩` enters the four-point correlators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondOrderVariant {
    /// The measured `⟨p_2²⟩`.
    ExactP2sq,
    /// `⟨p_2⟩²` in place of `⟨p_2²⟩`.
    Factorized,
}

/// Moment view that answers `⟨p_2²⟩` with `⟨p_2⟩²`.
struct Factorized<'a, M>(&'a M);

impl<M: PowerSumMoments> PowerSumMoments for Factorized<'_, M> {
    fn power_sum_mean(&self, key: &Partition) -> Option<f64> {
        if key.without_ones().parts() == [2, 2] {
            let p2 = self.0.power_sum_mean(&Partition::new(vec![2]).ok()?)?;
            Some(p2 * p2)
        } else {
            self.0.power_sum_mean(key)
        }
    }
}

/// Second-order mean entropy of one qubit:
/// `1 - (1/ln 2) [(1 - ⟨τ⟩)/2 + (1 - 2⟨τ⟩ + ⟨τ²⟩)/12]`.
pub fn second_order_entropy_pred(
    n_dim: u64,
    moments: &impl PowerSumMoments,
    variant: SecondOrderVariant,
) -> Result<f64> {
    let p2 = moment(moments, &[2])?;
    let tau = mean_tangle_pred(n_dim, p2)?;
    let tau2 = match variant {
        SecondOrderVariant::ExactP2sq => mean_tangle_sq_pred(n_dim, moments)?,
        SecondOrderVariant::Factorized => mean_tangle_sq_pred(n_dim, &Factorized(moments))?,
    };
    Ok(second_order_from_tangle_moments(tau, tau2))
}

/// `S_2` averaged term by term given `⟨τ⟩` and `⟨τ²⟩`.
pub fn second_order_from_tangle_moments(tau: f64, tau2: f64) -> f64 {
    1.0 - ((1.0 - tau) / 2.0 + (1.0 - 2.0 * tau + tau2) / 12.0) / LN_2
}

/// Mean single-qubit entropy of Haar-random states,
/// `(1/ln 2) Σ_{k=N/2+1}^{N-1} 1/k`.
pub fn page_entropy(n_dim: u64) -> Result<f64> {
    if n_dim < 2 || n_dim % 2 != 0 {
        return Err(invalid!("N must be even and at least 2, got {n_dim}"));
    }
    let sum = ((n_dim / 2 + 1)..n_dim)
        .rev()
        .fold(0.0, |acc, k| acc + 1.0 / k as f64);
    Ok(sum / LN_2)
}
