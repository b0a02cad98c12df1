//! Wavefunction moments, ensemble averages with standard errors, and
//! power-law fits across system sizes.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleSpec, StateVector};
use crate::entanglement::{
    linear_entropy_of, reduced_density_matrix, tangle_of, truncated_entropy_series,
    von_neumann_entropy, Bipartition,
};
use crate::error::{invalid, Error, Result};
use crate::partitions::{Partition, PowerSumMoments};

/// `p_q = Σ_i |ψ_i|^{2q}` for each requested q.
pub fn moments(psi: &StateVector, qs: &[f64]) -> Vec<f64> {
    let w = psi.probabilities();
    qs.iter().map(|&q| power_sum(&w, q)).collect()
}

fn power_sum(weights: &[f64], q: f64) -> f64 {
    if q == 1.0 {
        return weights.iter().sum();
    }
    if q.fract() == 0.0 && q.abs() < 64.0 {
        let k = q as i32;
        return weights.iter().map(|x| x.powi(k)).sum();
    }
    weights.iter().map(|x| x.powf(q)).sum()
}

/// `ξ = 1/p_2`.
pub fn participation_ratio(psi: &StateVector) -> f64 {
    1.0 / power_sum(&psi.probabilities(), 2.0)
}

/// Sample mean with its standard error (unbiased variance / √M).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            stderr: 0.0,
            samples: 0,
        }
    }

    /// Number of standard errors separating `self.mean` from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.mean - target;
        if self.stderr == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.stderr
        }
    }
}

/// Running mean and centered second moment; merged with Chan's update.
#[derive(Clone, Copy, Debug, Default)]
struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    fn estimate(&self) -> Estimate {
        let stderr = if self.n > 1 {
            (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            stderr,
            samples: self.n,
        }
    }
}

/// Per-state quantities that can be averaged over an ensemble.
///
/// Tangle-based observables (`tau*`, `S1`, `S2`, ...) use the single-qubit
/// cut on the first qubit of the bipartition's subsystem; `S` and `SL` use
/// the full bipartition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observable {
    /// Product of power sums `p_λ`; `(2)` is `p2`, `(2,2)` is `p2sq`.
    Moment(Partition),
    /// ξ = 1/p₂.
    ParticipationRatio,
    /// τ^k.
    TanglePower(u32),
    /// von Neumann entropy in bits.
    Entropy,
    LinearEntropy,
    /// Truncated series `S_m(τ)`.
    EntropySeries(u32),
}

impl Observable {
    pub fn p(q: u32) -> Self {
        Observable::Moment(Partition::new(vec![q]).expect("positive order"))
    }

    pub fn p2_squared() -> Self {
        Observable::Moment(Partition::new(vec![2, 2]).expect("valid partition"))
    }

    /// `p2, p3, p4, p2sq, xi, tau, tau2, tau3, S, SL, S1, S2`.
    pub fn registry() -> Vec<Observable> {
        vec![
            Observable::p(2),
            Observable::p(3),
            Observable::p(4),
            Observable::p2_squared(),
            Observable::ParticipationRatio,
            Observable::TanglePower(1),
            Observable::TanglePower(2),
            Observable::TanglePower(3),
            Observable::Entropy,
            Observable::LinearEntropy,
            Observable::EntropySeries(1),
            Observable::EntropySeries(2),
        ]
    }

    pub fn parse_list(s: &str) -> Result<Vec<Observable>> {
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse())
            .collect()
    }

    fn needs_tangle(&self) -> bool {
        matches!(
            self,
            Observable::TanglePower(_) | Observable::EntropySeries(_)
        )
    }

    fn needs_rho(&self) -> bool {
        matches!(self, Observable::Entropy | Observable::LinearEntropy)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Moment(p) if p.len() == 1 => write!(f, "p{}", p.parts()[0]),
            Observable::Moment(p) if p.parts() == [2, 2] => write!(f, "p2sq"),
            Observable::Moment(p) => {
                let parts: Vec<String> = p.parts().iter().map(|x| x.to_string()).collect();
                write!(f, "p[{}]", parts.join(","))
            }
            Observable::ParticipationRatio => write!(f, "xi"),
            Observable::TanglePower(1) => write!(f, "tau"),
            Observable::TanglePower(k) => write!(f, "tau{k}"),
            Observable::Entropy => write!(f, "S"),
            Observable::LinearEntropy => write!(f, "SL"),
            Observable::EntropySeries(m) => write!(f, "S{m}"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || invalid!("unknown observable {s:?}");
        let num = |t: &str| t.parse::<u32>().ok().filter(|&k| k >= 1);
        Ok(match s {
            "xi" => Observable::ParticipationRatio,
            "tau" => Observable::TanglePower(1),
            "S" => Observable::Entropy,
            "SL" => Observable::LinearEntropy,
            "p2sq" => Observable::p2_squared(),
            _ => {
                if let Some(rest) = s.strip_prefix("p[").and_then(|r| r.strip_suffix(']')) {
                    let p: Partition = rest.parse().map_err(|_| unknown())?;
                    if p.is_empty() || p.parts().contains(&1) {
                        return Err(unknown());
                    }
                    Observable::Moment(p)
                } else if let Some(k) = s.strip_prefix("tau").and_then(num) {
                    Observable::TanglePower(k)
                } else if let Some(q) = s.strip_prefix('p').and_then(num).filter(|&q| q >= 2) {
                    Observable::p(q)
                } else if let Some(m) = s.strip_prefix('S').and_then(num) {
                    Observable::EntropySeries(m)
                } else {
                    return Err(unknown());
                }
            }
        })
    }
}

/// Ensemble averages `⟨p_λ⟩` keyed by partitions without unit parts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MomentTable {
    entries: BTreeMap<Partition, Estimate>,
}

impl MomentTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: Partition, value: Estimate) {
        self.entries.insert(key.without_ones(), value);
    }

    pub fn insert_exact(&mut self, key: Partition, value: f64) {
        self.insert(key, Estimate::exact(value));
    }

    pub fn get(&self, key: &Partition) -> Option<Estimate> {
        let key = key.without_ones();
        if key.is_empty() {
            return Some(Estimate::exact(1.0));
        }
        self.entries.get(&key).copied()
    }

    /// `⟨p_q⟩`.
    pub fn p(&self, q: u32) -> Option<f64> {
        self.get(&Partition::new(vec![q]).ok()?).map(|e| e.mean)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Partition, &Estimate)> {
        self.entries.iter()
    }

    /// Table of a fixed modulus profile: every `p_λ` with parts ≥ 2 up to
    /// weight `max_weight`, computed exactly.
    pub fn from_weights(weights: &[f64], max_weight: u32) -> Self {
        let mut out = Self::new();
        for w in 2..=max_weight {
            for lambda in crate::partitions::enumerate_partitions(w) {
                if lambda.parts().contains(&1) {
                    continue;
                }
                let v: f64 = lambda
                    .parts()
                    .iter()
                    .map(|&q| power_sum(weights, q as f64))
                    .product();
                out.insert_exact(lambda, v);
            }
        }
        out
    }
}

impl PowerSumMoments for MomentTable {
    fn power_sum_mean(&self, key: &Partition) -> Option<f64> {
        self.get(key).map(|e| e.mean)
    }
}

/// Averages of a set of observables at one system size.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary {
    pub n_qubits: u32,
    pub bipartition: Bipartition,
    pub estimates: Vec<(Observable, Estimate)>,
}

impl EnsembleSummary {
    pub fn get(&self, obs: &Observable) -> Option<Estimate> {
        self.estimates
            .iter()
            .find(|(o, _)| o == obs)
            .map(|(_, e)| *e)
    }

    /// Mean of `obs`, or a missing-data error.
    pub fn mean(&self, obs: &Observable) -> Result<f64> {
        self.get(obs)
            .map(|e| e.mean)
            .ok_or_else(|| Error::MissingData(format!("observable {obs} was not measured")))
    }

    /// The measured moments as a table for the theory module.
    pub fn moment_table(&self) -> MomentTable {
        let mut t = MomentTable::new();
        for (o, e) in &self.estimates {
            if let Observable::Moment(p) = o {
                t.insert(p.clone(), *e);
            }
        }
        t
    }

    pub fn rows(&self) -> Vec<ResultRow> {
        self.estimates
            .iter()
            .map(|(o, e)| ResultRow::new(self.n_qubits, o.to_string(), *e))
            .collect()
    }
}

/// Values of every observable for one state.
pub fn evaluate_state(
    psi: &StateVector,
    b: &Bipartition,
    observables: &[Observable],
) -> Result<Vec<f64>> {
    let weights = psi.probabilities();
    let mut power_cache: BTreeMap<u32, f64> = BTreeMap::new();
    let mut p = |q: u32| {
        *power_cache
            .entry(q)
            .or_insert_with(|| power_sum(&weights, q as f64))
    };

    let rho = if observables.iter().any(Observable::needs_rho) {
        Some(reduced_density_matrix(psi, b)?)
    } else {
        None
    };
    let tau = if observables.iter().any(Observable::needs_tangle) {
        if b.nu() == 1 {
            let rho = rho
                .as_ref()
                .map_or_else(|| reduced_density_matrix(psi, b), |r| Ok(r.clone()))?;
            Some(tangle_of(&rho))
        } else {
            let single = Bipartition::new(b.n_qubits(), vec![b.subset()[0]])?;
            Some(tangle_of(&reduced_density_matrix(psi, &single)?))
        }
    } else {
        None
    };

    observables
        .iter()
        .map(|o| {
            Ok(match o {
                Observable::Moment(lambda) => lambda.parts().iter().map(|&q| p(q)).product(),
                Observable::ParticipationRatio => 1.0 / p(2),
                Observable::TanglePower(k) => tau.expect("tangle computed").powi(*k as i32),
                Observable::EntropySeries(m) => {
                    truncated_entropy_series(tau.expect("tangle computed"), *m)
                }
                Observable::Entropy => von_neumann_entropy(rho.as_ref().expect("rho computed"))?,
                Observable::LinearEntropy => linear_entropy_of(rho.as_ref().expect("rho computed")),
            })
        })
        .collect()
}

/// Averages `observables` over the first `samples` states of the ensemble at
/// size `n_qubits`.
///
/// Realizations are evaluated in parallel on the current rayon pool; partial
/// accumulators are merged in realization order, so the result does not
/// depend on the number of workers.
pub fn ensemble_average(
    spec: &EnsembleSpec,
    n_qubits: u32,
    observables: &[Observable],
    samples: usize,
    b: &Bipartition,
) -> Result<EnsembleSummary> {
    if observables.is_empty() {
        return Err(invalid!("no observables requested"));
    }
    if b.n_qubits() != n_qubits {
        return Err(invalid!(
            "bipartition is for {} qubits, ensemble size is {n_qubits}",
            b.n_qubits()
        ));
    }
    let est = ensemble_average_with(spec, n_qubits, samples, observables.len(), |psi| {
        evaluate_state(psi, b, observables)
    })?;
    Ok(EnsembleSummary {
        n_qubits,
        bipartition: b.clone(),
        estimates: observables.iter().cloned().zip(est).collect(),
    })
}

/// Like [`ensemble_average`] for an arbitrary per-state map returning
/// `width` values.
pub fn ensemble_average_with<F>(
    spec: &EnsembleSpec,
    n_qubits: u32,
    samples: usize,
    width: usize,
    f: F,
) -> Result<Vec<Estimate>>
where
    F: Fn(&StateVector) -> Result<Vec<f64>> + Sync,
{
    if samples < 2 {
        return Err(invalid!("need at least two samples, got {samples}"));
    }
    spec.validate_for(n_qubits)?;
    let batch = spec.batch_size(n_qubits);
    let realizations = samples.div_ceil(batch);

    let partials: Vec<Result<Vec<Accumulator>>> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let take = batch.min(samples - r * batch);
            let states = spec.realization(n_qubits, r as u64)?;
            let mut acc = vec![Accumulator::default(); width];
            for psi in states.iter().take(take) {
                let values = f(psi)?;
                if values.len() != width {
                    return Err(invalid!(
                        "expected {width} values per state, got {}",
                        values.len()
                    ));
                }
                for (a, v) in acc.iter_mut().zip(values) {
                    a.push(v);
                }
            }
            Ok(acc)
        })
        .collect();

    let mut total = vec![Accumulator::default(); width];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part?.iter()) {
            t.merge(p);
        }
    }
    Ok(total.iter().map(Accumulator::estimate).collect())
}

/// Per-state values of `f` for the first `samples` states, in stream order.
pub fn ensemble_samples_with<F>(
    spec: &EnsembleSpec,
    n_qubits: u32,
    samples: usize,
    f: F,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&StateVector) -> Result<Vec<f64>> + Sync,
{
    spec.validate_for(n_qubits)?;
    let batch = spec.batch_size(n_qubits);
    let realizations = samples.div_ceil(batch);
    let parts: Vec<Result<Vec<Vec<f64>>>> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let take = batch.min(samples - r * batch);
            let states = spec.realization(n_qubits, r as u64)?;
            states.iter().take(take).map(&f).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(samples);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Mean and standard error of each column of `rows`.
pub fn column_estimates(rows: &[Vec<f64>]) -> Vec<Estimate> {
    let width = rows.first().map_or(0, Vec::len);
    let mut acc = vec![Accumulator::default(); width];
    for r in rows {
        for (a, v) in acc.iter_mut().zip(r) {
            a.push(*v);
        }
    }
    acc.iter().map(Accumulator::estimate).collect()
}

/// Mean and standard error of one derived per-sample series.
pub fn series_estimate(values: impl IntoIterator<Item = f64>) -> Estimate {
    let mut acc = Accumulator::default();
    values.into_iter().for_each(|v| acc.push(v));
    acc.estimate()
}

/// Average over an explicit list of states (no parallelism).
pub fn average_states(
    states: &[StateVector],
    b: &Bipartition,
    observables: &[Observable],
) -> Result<Vec<Estimate>> {
    let mut acc = vec![Accumulator::default(); observables.len()];
    for psi in states {
        for (a, v) in acc.iter_mut().zip(evaluate_state(psi, b, observables)?) {
            a.push(v);
        }
    }
    Ok(acc.iter().map(Accumulator::estimate).collect())
}

/// Least-squares line through `(n_r, log₂ value)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub sizes: Vec<u32>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub residuals: Vec<f64>,
}

impl ScalingFit {
    pub fn predict(&self, n_qubits: f64) -> f64 {
        (self.intercept + self.slope * n_qubits).exp2()
    }
}

/// Fits `log₂ value = intercept + slope · n_r`. The slope is the exponent of
/// `N = 2^{n_r}`. With `errors`, points are weighted by the inverse variance
/// of `log₂ value`.
pub fn fit_scaling(sizes: &[u32], values: &[f64], errors: Option<&[f64]>) -> Result<ScalingFit> {
    if sizes.len() != values.len() {
        return Err(invalid!(
            "{} sizes but {} values",
            sizes.len(),
            values.len()
        ));
    }
    if sizes.len() < 3 {
        return Err(invalid!(
            "a scaling fit needs at least 3 sizes, got {}",
            sizes.len()
        ));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(invalid!("scaling fit needs positive values, got {v}"));
    }
    let x: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = values.iter().map(|v| v.log2()).collect();
    let w: Vec<f64> = match errors {
        None => vec![1.0; x.len()],
        Some(err) => {
            if err.len() != values.len() {
                return Err(invalid!("{} errors for {} values", err.len(), values.len()));
            }
            err.iter()
                .zip(values)
                .map(|(e, v)| {
                    let s = e / (v * std::f64::consts::LN_2);
                    if s > 0.0 {
                        Ok(1.0 / (s * s))
                    } else {
                        Err(invalid!("weighted fit needs positive errors, got {e}"))
                    }
                })
                .collect::<Result<_>>()?
        }
    };
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(a, b)| b * (a - xm).powi(2)).sum();
    let sxy: f64 = x
        .iter()
        .zip(&y)
        .zip(&w)
        .map(|((a, c), b)| b * (a - xm) * (c - ym))
        .sum();
    if sxx == 0.0 {
        return Err(invalid!("scaling fit needs at least two distinct sizes"));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let residuals: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(a, c)| c - (intercept + slope * a))
        .collect();
    let slope_stderr = if errors.is_some() {
        (1.0 / sxx).sqrt()
    } else {
        let ssr: f64 = residuals.iter().map(|r| r * r).sum();
        (ssr / (x.len() - 2) as f64 / sxx).sqrt()
    };
    Ok(ScalingFit {
        sizes: sizes.to_vec(),
        slope,
        intercept,
        slope_stderr,
        residuals,
    })
}

/// `D_q = -slope / (q - 1)` for a fit of `⟨p_q⟩`.
pub fn fractal_dimension(q: f64, fit: &ScalingFit) -> Result<f64> {
    if q == 1.0 {
        return Err(invalid!("D_q from moments is undefined at q = 1"));
    }
    Ok(-fit.slope / (q - 1.0))
}

/// One line of a long-format results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n_r: u32,
    pub observable: String,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl ResultRow {
    pub fn new(n_r: u32, observable: impl Into<String>, e: Estimate) -> Self {
        Self {
            n_r,
            observable: observable.into(),
            mean: e.mean,
            stderr: e.stderr,
            samples: e.samples,
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean,
            stderr: self.stderr,
            samples: self.samples,
        }
    }
}

/// Header `n_r,observable,mean,stderr,samples`.
pub fn write_rows_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["n_r", "observable", "mean", "stderr", "samples"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["n_r", "observable", "mean", "stderr", "samples"] {
        return Err(invalid!("unexpected CSV header {:?}", headers));
    }
    r.deserialize().map(|row| Ok(row?)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::ModuliProfile;
    use num_complex::Complex64;

    fn from_weights(w: &[f64]) -> StateVector {
        StateVector::new(w.iter().map(|x| Complex64::new(x.sqrt(), 0.0)).collect()).unwrap()
    }

    #[test]
    fn moment_examples() {
        let u = StateVector::uniform(3);
        let m = moments(&u, &[1.0, 2.0, 3.0, 2.5]);
        for (got, q) in m.iter().zip([1.0, 2.0, 3.0, 2.5]) {
            assert!((got - 8f64.powf(1.0 - q)).abs() < 1e-14);
        }
        let b = StateVector::basis(3, 2).unwrap();
        assert!(moments(&b, &[2.0, 3.0])
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-15));
        let s = from_weights(&[0.5, 0.25, 0.125, 0.125]);
        assert!((moments(&s, &[2.0])[0] - 0.34375).abs() < 1e-15);
        assert!((participation_ratio(&s) - 32.0 / 11.0).abs() < 1e-12);
        assert!((participation_ratio(&u) - 8.0).abs() < 1e-12);
        assert!((participation_ratio(&b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn observable_labels_roundtrip() {
        for o in Observable::registry() {
            assert_eq!(o.to_string().parse::<Observable>().unwrap(), o);
        }
        let custom: Observable = "p[3,2]".parse().unwrap();
        assert_eq!(custom.to_string(), "p[3,2]");
        assert_eq!("p[2,2]".parse::<Observable>().unwrap().to_string(), "p2sq");
        assert!("q7".parse::<Observable>().is_err());
        assert!("p1".parse::<Observable>().is_err());
        assert!("p[2,1]".parse::<Observable>().is_err());
        assert!("tau0".parse::<Observable>().is_err());
    }

    #[test]
    fn degenerate_ensemble_has_zero_error() {
        let psi = from_weights(&[0.5, 0.25, 0.125, 0.125]);
        let states = vec![psi; 10];
        let b = Bipartition::leading(2, 1).unwrap();
        let est = average_states(&states, &b, &Observable::registry()).unwrap();
        assert!(est.iter().all(|e| e.stderr == 0.0 && e.samples == 10));
    }

    #[test]
    fn accumulator_merge_matches_direct() {
        let xs: Vec<f64> = (0..37).map(|i| ((i * 7919) % 101) as f64 / 7.0).collect();
        let mut direct = Accumulator::default();
        xs.iter().for_each(|&x| direct.push(x));
        let mut merged = Accumulator::default();
        for chunk in xs.chunks(5) {
            let mut a = Accumulator::default();
            chunk.iter().for_each(|&x| a.push(x));
            merged.merge(&a);
        }
        let (d, m) = (direct.estimate(), merged.estimate());
        assert!((d.mean - m.mean).abs() < 1e-12);
        assert!((d.stderr - m.stderr).abs() < 1e-12);
        let mean = xs.iter().sum::<f64>() / 37.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 36.0;
        assert!((d.stderr - (var / 37.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exchangeable_uniform_tangle() {
        let spec = EnsembleSpec::exchangeable(ModuliProfile::Uniform, 3);
        let b = Bipartition::leading(2, 1).unwrap();
        let obs = [Observable::TanglePower(1)];
        let s = ensemble_average(&spec, 2, &obs, 10_000, &b).unwrap();
        let tau = s.get(&obs[0]).unwrap();
        assert!(tau.z_score(0.5).abs() < 3.0, "{tau:?}");
        assert_eq!(s, ensemble_average(&spec, 2, &obs, 10_000, &b).unwrap());
    }

    #[test]
    fn ensemble_average_guards() {
        let spec = EnsembleSpec::cue(1);
        let b = Bipartition::leading(4, 1).unwrap();
        assert!(ensemble_average(&spec, 4, &Observable::registry(), 1, &b).is_err());
        assert!(ensemble_average(&spec, 4, &[], 10, &b).is_err());
        assert!(ensemble_average(&spec, 5, &Observable::registry(), 10, &b).is_err());
    }

    #[test]
    fn fit_examples() {
        let sizes: Vec<u32> = (4..=10).collect();
        let vals: Vec<f64> = sizes.iter().map(|&n| (-(n as f64)).exp2()).collect();
        let fit = fit_scaling(&sizes, &vals, None).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
        let flat = fit_scaling(&sizes, &vec![0.3; sizes.len()], None).unwrap();
        assert!(flat.slope.abs() < 1e-12);
        assert!(fit_scaling(&[4, 5], &[1.0, 2.0], None).is_err());
        assert!(fit_scaling(&[4, 5, 6], &[1.0, 0.0, 2.0], None).is_err());
    }

    #[test]
    fn noisy_synthetic_fit() {
        use rand::Rng;
        use rand_distr::StandardNormal;
        let mut rng = crate::seed::stream(99, &[]);
        let sizes: Vec<u32> = (4..=10).collect();
        let vals: Vec<f64> = sizes
            .iter()
            .map(|&n| {
                let noise: f64 = rng.sample(StandardNormal);
                3.0 * (-0.84 * n as f64).exp2() * (1.0 + 0.01 * noise)
            })
            .collect();
        let fit = fit_scaling(&sizes, &vals, None).unwrap();
        assert!((fit.slope + 0.84).abs() < 0.02, "{}", fit.slope);
        let errs: Vec<f64> = vals.iter().map(|v| 0.01 * v).collect();
        let wfit = fit_scaling(&sizes, &vals, Some(&errs)).unwrap();
        assert!((wfit.slope + 0.84).abs() < 0.02);
    }

    #[test]
    fn fractal_dimensions() {
        let sizes: Vec<u32> = (4..=8).collect();
        let ones = vec![1.0; sizes.len()];
        let fit = fit_scaling(&sizes, &ones, None).unwrap();
        assert!(fractal_dimension(2.0, &fit).unwrap().abs() < 1e-12);
        let half: Vec<f64> = sizes.iter().map(|&n| (-(n as f64) / 2.0).exp2()).collect();
        let fit = fit_scaling(&sizes, &half, None).unwrap();
        assert!((fractal_dimension(2.0, &fit).unwrap() - 0.5).abs() < 1e-12);
        assert!(fractal_dimension(1.0, &fit).is_err());
    }

    #[test]
    fn csv_header_and_roundtrip() {
        let rows = vec![
            ResultRow::new(
                4,
                "p2",
                Estimate {
                    mean: 0.1,
                    stderr: 0.01,
                    samples: 100,
                },
            ),
            ResultRow::new(
                5,
                "S",
                Estimate {
                    mean: 0.9,
                    stderr: 0.001,
                    samples: 100,
                },
            ),
        ];
        let mut buf = Vec::new();
        write_rows_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n_r,observable,mean,stderr,samples\n"));
        assert_eq!(read_rows_csv(buf.as_slice()).unwrap(), rows);
        assert!(read_rows_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn moment_table_lookup() {
        let w = [0.4, 0.3, 0.2, 0.1];
        let t = MomentTable::from_weights(&w, 4);
        assert_eq!(t.get(&Partition::empty()).unwrap().mean, 1.0);
        let p2: f64 = w.iter().map(|x| x * x).sum();
        assert!((t.p(2).unwrap() - p2).abs() < 1e-15);
        let p2sq = t.get(&Partition::new(vec![2, 2, 1]).unwrap()).unwrap().mean;
        assert!((p2sq - p2 * p2).abs() < 1e-15);
        assert!(t.get(&Partition::new(vec![5]).unwrap()).is_none());
    }
}
