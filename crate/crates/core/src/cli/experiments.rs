//! Measurement protocols behind `measure`, `scan`, `fig1`, `fig2` and
//! `validate`.
//!
//! Predictions that are linear in the moments are evaluated per state, so
//! their ensemble mean equals the prediction at the measured moments and
//! their standard errors are paired with the measured quantities.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleKind, EnsembleSpec, StateVector};
use crate::entanglement::{
    linear_entropy_of, reduced_density_matrix, tangle_of, truncated_entropy_series,
    von_neumann_entropy, Bipartition,
};
use crate::error::{invalid, Error, Result};
use crate::oracle::{exact_phase_average_tangle_power, OracleProblem};
use crate::partitions::{tangle_power_coefficients, FixedModuli, Partition, PowerSumMoments};
use crate::seed;
use crate::statistics::{
    column_estimates, ensemble_average_with, ensemble_samples_with, evaluate_state, fit_scaling,
    series_estimate, Estimate, Observable, ResultRow, ScalingFit,
};
use crate::theory::{
    first_order_entropy_pred, mean_linear_entropy_pred, mean_tangle_power_pred, mean_tangle_pred,
    mean_tangle_sq_pred, second_order_entropy_pred, SecondOrderVariant,
};

/// Label prefix of rows that carry predictions rather than measurements.
pub const THEORY_PREFIX: &str = "theory:";

/// Moments of a single state, enough for predictions up to `⟨τ²⟩`.
#[derive(Clone, Copy, Debug)]
struct StateMoments {
    p2: f64,
    p3: f64,
    p4: f64,
}

impl StateMoments {
    fn of(psi: &StateVector) -> Self {
        let w = psi.probabilities();
        let sum = |k: i32| w.iter().map(|x| x.powi(k)).sum::<f64>();
        Self {
            p2: sum(2),
            p3: sum(3),
            p4: sum(4),
        }
    }
}

impl PowerSumMoments for StateMoments {
    fn power_sum_mean(&self, key: &Partition) -> Option<f64> {
        match key.without_ones().parts() {
            [] => Some(1.0),
            [2] => Some(self.p2),
            [3] => Some(self.p3),
            [4] => Some(self.p4),
            [2, 2] => Some(self.p2 * self.p2),
            _ => None,
        }
    }
}

/// Plain moment values in table form.
struct MeanMoments {
    p2: f64,
    p3: f64,
    p4: f64,
    p2sq: f64,
}

impl PowerSumMoments for MeanMoments {
    fn power_sum_mean(&self, key: &Partition) -> Option<f64> {
        match key.without_ones().parts() {
            [] => Some(1.0),
            [2] => Some(self.p2),
            [3] => Some(self.p3),
            [4] => Some(self.p4),
            [2, 2] => Some(self.p2sq),
            _ => None,
        }
    }
}

/// `∂S_2/∂⟨p_2²⟩`, constant for a given `N`.
fn second_order_p2sq_slope(n_dim: u64) -> Result<f64> {
    let n = n_dim as f64;
    let base = MeanMoments {
        p2: 1.0 / n,
        p3: 1.0 / (n * n),
        p4: 1.0 / (n * n * n),
        p2sq: 0.0,
    };
    let lo = second_order_entropy_pred(n_dim, &base, SecondOrderVariant::ExactP2sq)?;
    let hi = second_order_entropy_pred(
        n_dim,
        &MeanMoments { p2sq: 1.0, ..base },
        SecondOrderVariant::ExactP2sq,
    )?;
    Ok(hi - lo)
}

fn dim_of(n_qubits: u32) -> u64 {
    1u64 << n_qubits
}

/// Standard error of `A + c·B` from the estimates of `A`, `B` and `A + B`.
fn combined_stderr(a: &Estimate, b: &Estimate, sum: &Estimate, c: f64) -> f64 {
    let n = a.samples as f64;
    let var = |e: &Estimate| e.stderr * e.stderr * n;
    let (va, vb, vs) = (var(a), var(b), var(sum));
    let cov = 0.5 * (vs - va - vb);
    ((va + c * c * vb + 2.0 * c * cov).max(0.0) / n).sqrt()
}

/// Measured observables at one size, optionally followed by `theory:` rows.
///
/// Theory rows: `tau` and `SL` from the mean-tangle formulas, `S1` the
/// first-order entropy at the bipartition's ν, and for ν = 1 also `tau2`,
/// `S2` and `S2-factorized`.
pub fn measure_size(
    spec: &EnsembleSpec,
    b: &Bipartition,
    observables: &[Observable],
    samples: usize,
    with_theory: bool,
) -> Result<Vec<ResultRow>> {
    let n_qubits = b.n_qubits();
    let n_dim = dim_of(n_qubits);
    let nu = b.nu();
    let single = nu == 1;
    let k = if with_theory && single {
        second_order_p2sq_slope(n_dim)?
    } else {
        0.0
    };
    let n_theory = match (with_theory, single) {
        (false, _) => 0,
        (true, false) => 3,
        (true, true) => 8,
    };
    let width = observables.len() + n_theory;
    if width == 0 {
        return Err(invalid!("no observables requested"));
    }
    let est = ensemble_average_with(spec, n_qubits, samples, width, |psi| {
        let mut v = evaluate_state(psi, b, observables)?;
        if with_theory {
            let m = StateMoments::of(psi);
            v.push(mean_tangle_pred(n_dim, m.p2)?);
            v.push(mean_linear_entropy_pred(n_dim, nu, m.p2)?);
            v.push(first_order_entropy_pred(n_dim, nu, m.p2)?);
            if single {
                v.push(mean_tangle_sq_pred(n_dim, &m)?);
                let s2 = second_order_entropy_pred(n_dim, &m, SecondOrderVariant::ExactP2sq)?;
                v.push(s2);
                let a = s2 - k * m.p2 * m.p2;
                v.push(a);
                v.push(m.p2);
                v.push(a + m.p2);
            }
        }
        Ok(v)
    })?;
    let mut rows: Vec<ResultRow> = observables
        .iter()
        .zip(&est)
        .map(|(o, e)| ResultRow::new(n_qubits, o.to_string(), *e))
        .collect();
    if with_theory {
        let t = &est[observables.len()..];
        let tag = |s: &str| format!("{THEORY_PREFIX}{s}");
        rows.push(ResultRow::new(n_qubits, tag("tau"), t[0]));
        rows.push(ResultRow::new(n_qubits, tag("SL"), t[1]));
        rows.push(ResultRow::new(n_qubits, tag("S1"), t[2]));
        if single {
            rows.push(ResultRow::new(n_qubits, tag("tau2"), t[3]));
            rows.push(ResultRow::new(n_qubits, tag("S2"), t[4]));
            let (a, bb, sum) = (&t[5], &t[6], &t[7]);
            let p = bb.mean;
            let factorized = Estimate {
                mean: a.mean + k * p * p,
                stderr: combined_stderr(a, bb, sum, 2.0 * k * p),
                samples: a.samples,
            };
            rows.push(ResultRow::new(n_qubits, tag("S2-factorized"), factorized));
        }
    }
    Ok(rows)
}

/// Which average stands for `⟨S_1⟩`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum S1Source {
    /// `S_1(τ)` of every state, averaged.
    #[default]
    PerSample,
    /// The first-order prediction at the measured `⟨p_2⟩`.
    MomentLevel,
}

impl FromStr for S1Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-sample" => Ok(S1Source::PerSample),
            "moment-level" => Ok(S1Source::MomentLevel),
            _ => Err(invalid!(
                "unknown S1 source {s:?} (per-sample or moment-level)"
            )),
        }
    }
}

/// Outcome of an ordering claim tested on means with their errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// Holds on the means but with less than three standard errors of margin.
    InconclusivePass,
    Fail,
}

impl Verdict {
    fn from_margin(holds: bool, margin: &Estimate) -> Self {
        if !holds {
            Verdict::Fail
        } else if margin.mean > 3.0 * margin.stderr {
            Verdict::Pass
        } else {
            Verdict::InconclusivePass
        }
    }

    pub fn passed(self) -> bool {
        self != Verdict::Fail
    }
}

/// One point of the second-order comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Point {
    pub n_r: u32,
    pub entropy: Estimate,
    pub s1: Estimate,
    /// Second-order prediction with the measured `⟨p_2²⟩`.
    pub s2: Estimate,
    /// Second-order prediction with `⟨p_2⟩²`.
    pub s2_factorized: Estimate,
    /// `S_2(τ)` of every state, averaged.
    pub s2_series: Estimate,
    pub p2: Estimate,
    pub p3: Estimate,
    pub p4: Estimate,
    pub p2sq: Estimate,
    /// `1 - ⟨S_1⟩/⟨S⟩` and likewise below.
    pub rel_s1: Estimate,
    pub rel_s2: Estimate,
    pub rel_s2_factorized: Estimate,
    pub rel_s2_series: Estimate,
    /// `|⟨S⟩ - ⟨S_1⟩| - |⟨S⟩ - ⟨S_2⟩|`.
    pub second_margin: Estimate,
    /// `|⟨S⟩ - ⟨S_1⟩| - |⟨S⟩ - ⟨S_2⟩_factorized|`.
    pub factorized_margin: Estimate,
    /// Whether the factorized value lies between `⟨S_2⟩` and `⟨S_1⟩`.
    pub factorized_between: bool,
}

impl Fig2Point {
    pub fn second_order_verdict(&self) -> Verdict {
        Verdict::from_margin(self.second_margin.mean > 0.0, &self.second_margin)
    }

    pub fn factorized_verdict(&self) -> Verdict {
        let holds = self.factorized_between || self.factorized_margin.mean > 0.0;
        if self.factorized_between && self.factorized_margin.mean <= 0.0 {
            return Verdict::InconclusivePass;
        }
        Verdict::from_margin(holds, &self.factorized_margin)
    }
}

/// Per-state columns feeding [`fig2_point`].
pub const FIG2_COLUMNS: [&str; 8] = ["S", "S1", "S2", "p2", "p3", "p4", "theory:S1", "theory:S2"];

/// Per-state values `FIG2_COLUMNS` for the single-qubit cut of `b`.
pub fn fig2_columns(psi: &StateVector, b: &Bipartition) -> Result<Vec<f64>> {
    let n_dim = psi.dim() as u64;
    let rho = reduced_density_matrix(psi, b)?;
    let s = von_neumann_entropy(&rho)?;
    let tau = tangle_of(&rho);
    let m = StateMoments::of(psi);
    Ok(vec![
        s,
        truncated_entropy_series(tau, 1),
        truncated_entropy_series(tau, 2),
        m.p2,
        m.p3,
        m.p4,
        first_order_entropy_pred(n_dim, 1, m.p2)?,
        second_order_entropy_pred(n_dim, &m, SecondOrderVariant::ExactP2sq)?,
    ])
}

/// `1 - mean(a)/mean(s)` with a delta-method error from paired samples.
fn relative_gap(a: &[f64], s: &[f64]) -> Estimate {
    let am = a.iter().sum::<f64>() / a.len() as f64;
    let sm = s.iter().sum::<f64>() / s.len() as f64;
    let ratio = am / sm;
    let lin = series_estimate(a.iter().zip(s).map(|(x, y)| -(x - ratio * y) / sm));
    Estimate {
        mean: 1.0 - ratio,
        ..lin
    }
}

/// `|mean(a) - mean(s)| - |mean(b) - mean(s)|` with its paired error.
fn closeness_margin(a: &[f64], b: &[f64], s: &[f64]) -> Estimate {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let sa = (mean(a) - mean(s)).signum();
    let sb = (mean(b) - mean(s)).signum();
    series_estimate((0..s.len()).map(|i| sa * (a[i] - s[i]) - sb * (b[i] - s[i])))
}

/// Builds one point from per-state rows laid out as [`FIG2_COLUMNS`].
pub fn fig2_point(n_r: u32, rows: &[Vec<f64>], s1_source: S1Source) -> Result<Fig2Point> {
    if rows.len() < 2 {
        return Err(invalid!("need at least two samples, got {}", rows.len()));
    }
    if rows.iter().any(|r| r.len() != FIG2_COLUMNS.len()) {
        return Err(invalid!("rows must have {} columns", FIG2_COLUMNS.len()));
    }
    let n_dim = dim_of(n_r);
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let s = col(0);
    let s1 = match s1_source {
        S1Source::PerSample => col(1),
        S1Source::MomentLevel => col(6),
    };
    let s2_series = col(2);
    let p2 = col(3);
    let s2 = col(7);
    let est = column_estimates(rows);
    let p2sq_values: Vec<f64> = p2.iter().map(|x| x * x).collect();
    let p2sq = series_estimate(p2sq_values.iter().copied());
    let k = second_order_p2sq_slope(n_dim)?;
    let pm = est[3].mean;
    // Linearization of the factorized prediction around the measured ⟨p_2⟩.
    let s2f: Vec<f64> = (0..rows.len())
        .map(|i| s2[i] + k * (2.0 * pm * p2[i] - p2sq_values[i] - pm * pm))
        .collect();
    let s2f_est = series_estimate(s2f.iter().copied());
    let factorized_direct = second_order_entropy_pred(
        n_dim,
        &MeanMoments {
            p2: pm,
            p3: est[4].mean,
            p4: est[5].mean,
            p2sq: p2sq.mean,
        },
        SecondOrderVariant::Factorized,
    )?;
    let s2_factorized = Estimate {
        mean: factorized_direct,
        ..s2f_est
    };
    let s1_est = series_estimate(s1.iter().copied());
    let lo = s1_est.mean.min(est[7].mean);
    let hi = s1_est.mean.max(est[7].mean);
    Ok(Fig2Point {
        n_r,
        entropy: est[0],
        s1: s1_est,
        s2: est[7],
        s2_factorized,
        s2_series: est[2],
        p2: est[3],
        p3: est[4],
        p4: est[5],
        p2sq,
        rel_s1: relative_gap(&s1, &s),
        rel_s2: relative_gap(&s2, &s),
        rel_s2_factorized: relative_gap(&s2f, &s),
        rel_s2_series: relative_gap(&s2_series, &s),
        second_margin: closeness_margin(&s1, &s2, &s),
        factorized_margin: closeness_margin(&s1, &s2f, &s),
        factorized_between: (lo..=hi).contains(&factorized_direct),
    })
}

/// Parameters of the second-order comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Config {
    pub ensemble: EnsembleSpec,
    pub sizes: Vec<u32>,
    pub samples: usize,
    #[serde(default)]
    pub s1_source: S1Source,
    #[serde(default)]
    pub weighted: bool,
}

/// Points, fits and ordering verdicts of a second-order comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Report {
    pub points: Vec<Fig2Point>,
    /// Fit of `log₂|1 - ⟨S_1⟩/⟨S⟩|`.
    pub s1_fit: ScalingFit,
    pub s2_fit: Option<ScalingFit>,
    pub s2_factorized_fit: Option<ScalingFit>,
    /// Fit of `log₂⟨p_2²⟩`.
    pub p2sq_fit: ScalingFit,
}

impl Fig2Report {
    pub fn rows(&self) -> Vec<ResultRow> {
        let mut out = Vec::new();
        for p in &self.points {
            let mut push = |label: &str, e: &Estimate| out.push(ResultRow::new(p.n_r, label, *e));
            push("S", &p.entropy);
            push("S1", &p.s1);
            push("S2", &p.s2_series);
            push("p2", &p.p2);
            push("p3", &p.p3);
            push("p4", &p.p4);
            push("p2sq", &p.p2sq);
            push("theory:S2", &p.s2);
            push("theory:S2-factorized", &p.s2_factorized);
            push("rel:S1", &p.rel_s1);
            push("rel:S2", &p.rel_s2);
            push("rel:S2-factorized", &p.rel_s2_factorized);
            push("rel:S2-series", &p.rel_s2_series);
        }
        out
    }
}

fn abs_fit(
    points: &[Fig2Point],
    pick: impl Fn(&Fig2Point) -> Estimate,
    weighted: bool,
) -> Result<ScalingFit> {
    let sizes: Vec<u32> = points.iter().map(|p| p.n_r).collect();
    let values: Vec<f64> = points.iter().map(|p| pick(p).mean.abs()).collect();
    let errors: Vec<f64> = points.iter().map(|p| pick(p).stderr).collect();
    fit_scaling(&sizes, &values, weighted.then_some(errors.as_slice()))
}

/// Slopes of the relative differences and of `⟨p_2²⟩` across sizes.
pub fn fig2_fit(points: Vec<Fig2Point>, weighted: bool) -> Result<Fig2Report> {
    Ok(Fig2Report {
        s1_fit: abs_fit(&points, |p| p.rel_s1, weighted)?,
        s2_fit: abs_fit(&points, |p| p.rel_s2, weighted).ok(),
        s2_factorized_fit: abs_fit(&points, |p| p.rel_s2_factorized, weighted).ok(),
        p2sq_fit: abs_fit(&points, |p| p.p2sq, weighted)?,
        points,
    })
}

/// Runs the second-order comparison on the single-qubit cut of qubit 0.
pub fn fig2_pipeline(config: &Fig2Config) -> Result<Fig2Report> {
    if !matches!(config.ensemble.kind, EnsembleKind::Intermediate { .. }) {
        return Err(invalid!(
            "the second-order comparison uses the intermediate ensemble"
        ));
    }
    if config.sizes.len() < 3 {
        return Err(invalid!(
            "need at least three sizes, got {}",
            config.sizes.len()
        ));
    }
    for &n in &config.sizes {
        config.ensemble.validate_for(n)?;
    }
    let mut points = Vec::with_capacity(config.sizes.len());
    for &n_r in &config.sizes {
        let b = Bipartition::leading(n_r, 1)?;
        let rows = ensemble_samples_with(&config.ensemble, n_r, config.samples, |psi| {
            fig2_columns(psi, &b)
        })?;
        points.push(fig2_point(n_r, &rows, config.s1_source)?);
    }
    fig2_fit(points, config.weighted)
}

/// A subsystem size, possibly tied to the system size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NuChoice {
    Fixed(u32),
    /// `⌊n_r/2⌋`.
    Half,
}

impl NuChoice {
    pub fn resolve(self, n_qubits: u32) -> u32 {
        match self {
            NuChoice::Fixed(v) => v,
            NuChoice::Half => n_qubits / 2,
        }
    }

    /// `[1, 2, half]`.
    pub fn defaults() -> Vec<NuChoice> {
        vec![NuChoice::Fixed(1), NuChoice::Fixed(2), NuChoice::Half]
    }
}

impl fmt::Display for NuChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NuChoice::Fixed(v) => write!(f, "{v}"),
            NuChoice::Half => write!(f, "half"),
        }
    }
}

impl FromStr for NuChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "half" {
            return Ok(NuChoice::Half);
        }
        s.parse::<u32>()
            .ok()
            .filter(|&v| v >= 1)
            .map(NuChoice::Fixed)
            .ok_or_else(|| {
                invalid!("subsystem size must be a positive integer or \"half\", got {s:?}")
            })
    }
}

impl TryFrom<String> for NuChoice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NuChoice> for String {
    fn from(n: NuChoice) -> String {
        n.to_string()
    }
}

/// Parameters of the first-order overlay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Config {
    pub ensemble: EnsembleSpec,
    pub sizes: Vec<u32>,
    pub nus: Vec<NuChoice>,
    pub samples: usize,
}

/// One `(n_r, ν)` point of the first-order overlay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Point {
    pub n_r: u32,
    pub series: NuChoice,
    pub nu: u32,
    /// `1/⟨p_2⟩`.
    pub mean_ipr: f64,
    pub p2: Estimate,
    pub entropy: Estimate,
    pub linear_entropy: Estimate,
    /// First-order prediction at the measured `⟨p_2⟩`.
    pub first_order: Estimate,
    /// `⟨S_1⟩ - ⟨S⟩`.
    pub deviation: Estimate,
    /// `⟨S_1⟩/⟨S⟩ - 1`.
    pub relative_deviation: Estimate,
}

/// Sign and trend of one series across sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Check {
    pub series: NuChoice,
    pub sizes: Vec<u32>,
    /// The prediction lies above the measured entropy at every size.
    pub above: bool,
    /// The relative deviation decreases strictly with size.
    pub decreasing: bool,
}

impl Fig1Check {
    pub fn passed(&self) -> bool {
        self.above && self.decreasing
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Report {
    pub points: Vec<Fig1Point>,
    pub checks: Vec<Fig1Check>,
}

impl Fig1Report {
    pub fn rows(&self) -> Vec<ResultRow> {
        let mut out = Vec::new();
        for p in &self.points {
            let tag = |s: &str| format!("{s}@nu={}", p.series);
            out.push(ResultRow::new(p.n_r, tag("p2"), p.p2));
            out.push(ResultRow::new(p.n_r, tag("S"), p.entropy));
            out.push(ResultRow::new(p.n_r, tag("SL"), p.linear_entropy));
            out.push(ResultRow::new(p.n_r, tag("theory:S1"), p.first_order));
            out.push(ResultRow::new(p.n_r, tag("rel:S1"), p.relative_deviation));
        }
        out
    }
}

/// First-order prediction against the measured entropy for several
/// bipartitions of the leading qubits.
pub fn fig1_pipeline(config: &Fig1Config) -> Result<Fig1Report> {
    if config.nus.is_empty() {
        return Err(invalid!("no subsystem sizes requested"));
    }
    let mut points = Vec::new();
    for &n_r in &config.sizes {
        config.ensemble.validate_for(n_r)?;
        let n_dim = dim_of(n_r);
        let mut nus: Vec<u32> = config
            .nus
            .iter()
            .map(|c| c.resolve(n_r))
            .filter(|&v| v >= 1 && 2 * v <= n_r)
            .collect();
        nus.sort_unstable();
        nus.dedup();
        if nus.is_empty() {
            continue;
        }
        let cuts: Vec<Bipartition> = nus
            .iter()
            .map(|&v| Bipartition::leading(n_r, v))
            .collect::<Result<_>>()?;
        // Layout: p2, then (S, SL, S1) per cut.
        let rows = ensemble_samples_with(&config.ensemble, n_r, config.samples, |psi| {
            let p2 = StateMoments::of(psi).p2;
            let mut v = vec![p2];
            for b in &cuts {
                let rho = reduced_density_matrix(psi, b)?;
                v.push(von_neumann_entropy(&rho)?);
                v.push(linear_entropy_of(&rho));
                v.push(first_order_entropy_pred(n_dim, b.nu(), p2)?);
            }
            Ok(v)
        })?;
        let est = column_estimates(&rows);
        for choice in &config.nus {
            let nu = choice.resolve(n_r);
            let Some(j) = nus.iter().position(|&v| v == nu) else {
                continue;
            };
            let base = 1 + 3 * j;
            let s: Vec<f64> = rows.iter().map(|r| r[base]).collect();
            let s1: Vec<f64> = rows.iter().map(|r| r[base + 2]).collect();
            let rel = relative_gap(&s1, &s);
            points.push(Fig1Point {
                n_r,
                series: *choice,
                nu,
                mean_ipr: 1.0 / est[0].mean,
                p2: est[0],
                entropy: est[base],
                linear_entropy: est[base + 1],
                first_order: est[base + 2],
                deviation: series_estimate(s1.iter().zip(&s).map(|(a, b)| a - b)),
                relative_deviation: Estimate {
                    mean: -rel.mean,
                    ..rel
                },
            });
        }
    }
    let mut checks = Vec::new();
    for choice in &config.nus {
        let series: Vec<&Fig1Point> = points.iter().filter(|p| p.series == *choice).collect();
        if series.is_empty() {
            continue;
        }
        checks.push(Fig1Check {
            series: *choice,
            sizes: series.iter().map(|p| p.n_r).collect(),
            above: series.iter().all(|p| p.deviation.mean > 0.0),
            decreasing: series
                .windows(2)
                .all(|w| w[1].relative_deviation.mean < w[0].relative_deviation.mean),
        });
    }
    Ok(Fig1Report { points, checks })
}

/// One line of the oracle-against-theory suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ValidationCheck {
    fn new(name: String, max_error: f64, tolerance: f64) -> Self {
        Self {
            name,
            passed: max_error < tolerance,
            max_error,
            tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateConfig {
    pub dims: Vec<usize>,
    pub powers: Vec<u32>,
    pub vectors: usize,
    pub seed: u64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            dims: vec![4, 6, 8],
            powers: vec![1, 2, 3],
            vectors: 20,
            seed: 0,
        }
    }
}

/// Flat-Dirichlet modulus vector of length `n` from stream `coords`.
pub fn random_moduli(n: usize, master: u64, coords: &[u64]) -> Vec<f64> {
    let mut rng = seed::stream(master, coords);
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x: f64| x / total).collect()
}

/// Exact `n = 1, 2` tangle coefficients from their closed forms.
pub fn closed_form_tangle_coefficients(n: u32, n_dim: u64) -> Vec<(Partition, BigInt)> {
    let nn = BigInt::from(n_dim);
    let p = |v: &[u32]| Partition::new(v.to_vec()).expect("valid partition");
    let base = &nn * (&nn - 2);
    match n {
        1 => vec![(p(&[1, 1]), base)],
        2 => vec![
            (p(&[1, 1, 1, 1]), &base * (&nn * &nn - 6 * &nn + 16)),
            (p(&[2, 1, 1]), 4 * &base * (&nn - 4)),
            (p(&[2, 2]), 4 * &base),
        ],
        _ => Vec::new(),
    }
}

/// Oracle against theory for random modulus vectors, the mean tangle
/// against its closed form, and the coefficient tables against their
/// closed forms.
pub fn validate_suite(config: &ValidateConfig) -> Result<Vec<ValidationCheck>> {
    let mut checks = Vec::new();
    for &n in &config.dims {
        let mut tangle_err = 0.0f64;
        for &power in &config.powers {
            let mut worst = 0.0f64;
            for v in 0..config.vectors {
                let x = random_moduli(n, config.seed, &[n as u64, power as u64, v as u64]);
                let oracle =
                    exact_phase_average_tangle_power(&OracleProblem::new(x.clone(), power, 0)?)?;
                let theory = mean_tangle_power_pred(power, n as u64, &FixedModuli { weights: &x })?;
                worst = worst.max((theory - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE));
                if power == 1 {
                    let p2: f64 = x.iter().map(|a| a * a).sum();
                    tangle_err = tangle_err.max((oracle - mean_tangle_pred(n as u64, p2)?).abs());
                }
            }
            checks.push(ValidationCheck::new(
                format!("oracle vs theory <tau^{power}> N={n}"),
                worst,
                1e-10,
            ));
        }
        if config.powers.contains(&1) {
            checks.push(ValidationCheck::new(
                format!("oracle <tau> vs mean-tangle formula N={n}"),
                tangle_err,
                1e-12,
            ));
        }
    }
    for n_dim in [4u64, 6, 8, 16] {
        for n in [1u32, 2] {
            let table = tangle_power_coefficients(n, n_dim)?;
            let expected = closed_form_tangle_coefficients(n, n_dim);
            let mut mismatches = 0usize;
            for (lambda, c) in table.iter() {
                let want = expected
                    .iter()
                    .find(|(l, _)| l == lambda)
                    .map_or_else(|| BigInt::from(0), |(_, v)| v.clone());
                if *c != want {
                    mismatches += 1;
                }
            }
            for (lambda, v) in &expected {
                if table.get(lambda) != *v {
                    mismatches += 1;
                }
            }
            checks.push(ValidationCheck::new(
                format!("coefficients n={n} N={n_dim}"),
                mismatches as f64,
                0.5,
            ));
        }
    }
    Ok(checks)
}
