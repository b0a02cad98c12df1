//! Command-line driver.
//!
//! Every invocation resolves into a [`RunConfig`], which is written next to
//! the results (or embedded in JSON output) and can be fed back with
//! `--config` to reproduce the run.

pub mod experiments;

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub use experiments::{
    fig1_pipeline, fig2_pipeline, validate_suite, Fig1Config, Fig1Report, Fig2Config, Fig2Report,
    NuChoice, S1Source, ValidateConfig, Verdict,
};

use crate::ensembles::{
    load_moduli_csv, EnsembleKind, EnsembleSpec, Gamma, ModuliProfile, Postprocess, StateVector,
};
use crate::entanglement::Bipartition;
use crate::error::{invalid, Error, Result};
use crate::partitions::{FixedModuli, Partition, PowerSumMoments};
use crate::statistics::{
    fit_scaling, fractal_dimension, read_rows_csv, write_rows_csv, Observable, ResultRow,
    ScalingFit,
};
use crate::theory::{
    first_order_entropy_pred, mean_linear_entropy_pred, mean_tangle_power_pred, mean_tangle_pred,
    mean_tangle_sq_pred, page_entropy, second_order_entropy_pred, SecondOrderVariant,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MFENTROPY_OUT_DIR";

const DEFAULT_OBSERVABLES: &str = "p2,p3,p4,p2sq,xi,tau,S,SL,S1,S2";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TheoryQuantity {
    /// Mean single-qubit entropy of Haar states.
    Page,
    /// Mean tangle.
    Tangle,
    /// Mean linear entropy of a ν-qubit subsystem.
    Linear,
    /// First-order mean entropy.
    FirstOrder,
    /// Mean squared tangle.
    TangleSq,
    /// Mean n-th power of the tangle.
    TanglePower,
    /// Second-order mean entropy of one qubit.
    SecondOrder,
}

impl fmt::Display for TheoryQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

/// Moment inputs for `theory`, keyed by observable label (`p2`, `p2sq`,
/// `p[3,3]`, ...), or a fixed modulus profile.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TheoryInputs {
    #[serde(default)]
    pub moments: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moduli: Option<Vec<f64>>,
}

impl TheoryInputs {
    fn table(&self) -> Result<BTreeMap<Partition, f64>> {
        let mut out = BTreeMap::new();
        for (label, v) in &self.moments {
            match label.parse::<Observable>()? {
                Observable::Moment(p) => {
                    out.insert(p.without_ones(), *v);
                }
                other => return Err(invalid!("{other} is not a moment")),
            }
        }
        Ok(out)
    }
}

struct Moments<'a> {
    table: BTreeMap<Partition, f64>,
    moduli: Option<FixedModuli<'a>>,
}

impl PowerSumMoments for Moments<'_> {
    fn power_sum_mean(&self, key: &Partition) -> Option<f64> {
        match &self.moduli {
            Some(m) => m.power_sum_mean(key),
            None => self.table.power_sum_mean(key),
        }
    }
}

/// Resolved parameters of one subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum CommandConfig {
    Sample {
        ensemble: EnsembleSpec,
        n_r: u32,
        count: usize,
    },
    Measure {
        ensemble: EnsembleSpec,
        n_r: u32,
        nu: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subset: Option<Vec<u32>>,
        samples: usize,
        observables: Vec<String>,
        #[serde(default)]
        theory: bool,
    },
    Scan {
        ensemble: EnsembleSpec,
        sizes: Vec<u32>,
        nu: u32,
        samples: usize,
        observables: Vec<String>,
        #[serde(default)]
        theory: bool,
    },
    Theory {
        quantity: TheoryQuantity,
        n_dim: u64,
        nu: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        power: Option<u32>,
        variant: SecondOrderVariant,
        inputs: TheoryInputs,
    },
    Fit {
        input: PathBuf,
        observable: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<f64>,
        #[serde(default)]
        weighted: bool,
        #[serde(default)]
        absolute: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fit_range: Option<(u32, u32)>,
    },
    Validate(ValidateConfig),
    Fig1(Fig1Config),
    Fig2(Fig2Config),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Sample { .. } => "sample",
            CommandConfig::Measure { .. } => "measure",
            CommandConfig::Scan { .. } => "scan",
            CommandConfig::Theory { .. } => "theory",
            CommandConfig::Fit { .. } => "fit",
            CommandConfig::Validate(_) => "validate",
            CommandConfig::Fig1(_) => "fig1",
            CommandConfig::Fig2(_) => "fig2",
        }
    }

    fn ensemble_mut(&mut self) -> Option<&mut EnsembleSpec> {
        match self {
            CommandConfig::Sample { ensemble, .. }
            | CommandConfig::Measure { ensemble, .. }
            | CommandConfig::Scan { ensemble, .. } => Some(ensemble),
            CommandConfig::Fig1(c) => Some(&mut c.ensemble),
            CommandConfig::Fig2(c) => Some(&mut c.ensemble),
            _ => None,
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandConfig,
    /// Master seed; overrides the seed of any ensemble in `command`.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl RunConfig {
    /// Propagates the master seed into the command.
    pub fn resolved(mut self) -> Self {
        let seed = self.seed;
        if let Some(e) = self.command.ensemble_mut() {
            e.seed = seed;
        }
        if let CommandConfig::Validate(v) = &mut self.command {
            v.seed = seed;
        }
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// What a run produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<serde_json::Value>,
    #[serde(skip)]
    pub summary: String,
    /// Set when a check of the run failed.
    #[serde(skip)]
    pub failure: Option<String>,
}

/// Inclusive list of sizes: `4..8`, `4..=8`, `4,6,8` or `4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeList(pub Vec<u32>);

impl FromStr for SizeList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid!("sizes must look like 4..8, 4,6,8 or 4, got {s:?}");
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
        let sizes = if let Some((a, b)) = s.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(bad());
            }
            (a..=b).collect()
        } else {
            s.split(',').map(num).collect::<Result<Vec<_>>>()?
        };
        if sizes.is_empty() {
            return Err(bad());
        }
        Ok(SizeList(sizes))
    }
}

fn parse_profile(s: &str) -> Result<ModuliProfile> {
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| invalid!("bad number {t:?} in profile {s:?}"))
    };
    match s.split_once(':') {
        None if s == "uniform" => Ok(ModuliProfile::Uniform),
        Some(("geometric", r)) => Ok(ModuliProfile::Geometric { ratio: num(r)? }),
        Some(("power-law", a)) => Ok(ModuliProfile::PowerLaw { exponent: num(a)? }),
        Some(("file", path)) => Ok(ModuliProfile::Explicit {
            values: load_moduli_csv(path)?,
        }),
        _ => Err(invalid!(
            "profile must be uniform, geometric:R, power-law:A or file:PATH, got {s:?}"
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EnsembleChoice {
    Cue,
    Intermediate,
    Manybody,
    Exchangeable,
}

#[derive(Args, Clone, Debug)]
struct EnsembleArgs {
    /// Ensemble family.
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleChoice>,
    /// Parameter of the intermediate ensemble, as p/q.
    #[arg(long, default_value = "1/3")]
    gamma: Gamma,
    /// Mean level spacing Δ0 of the many-body model.
    #[arg(long, default_value_t = 1.0)]
    delta0: f64,
    /// Width δ of the spacing distribution; defaults to Δ0.
    #[arg(long)]
    disorder: Option<f64>,
    /// Coupling scale J; defaults to 1.5 δ.
    #[arg(long)]
    coupling: Option<f64>,
    /// Modulus profile of the exchangeable ensemble.
    #[arg(long, default_value = "uniform")]
    profile: String,
    /// Eigenvectors kept per intermediate matrix.
    #[arg(long)]
    vectors_per_realization: Option<usize>,
    /// Central eigenstates kept per many-body realization.
    #[arg(long)]
    states_per_realization: Option<usize>,
    /// Randomly permute components of each state.
    #[arg(long)]
    shuffle: Option<bool>,
    /// Multiply components by independent random phases.
    #[arg(long)]
    randomize_phases: Option<bool>,
}

impl EnsembleArgs {
    fn spec(&self, default: EnsembleChoice, seed: u64) -> Result<EnsembleSpec> {
        let mut spec = match self.ensemble.unwrap_or(default) {
            EnsembleChoice::Cue => EnsembleSpec::cue(seed),
            EnsembleChoice::Intermediate => {
                let mut s = EnsembleSpec::intermediate(self.gamma, seed);
                if let EnsembleKind::Intermediate {
                    vectors_per_realization,
                    ..
                } = &mut s.kind
                {
                    *vectors_per_realization = self.vectors_per_realization;
                }
                s
            }
            EnsembleChoice::Manybody => {
                let disorder = self.disorder.unwrap_or(self.delta0);
                let coupling = self.coupling.unwrap_or(1.5 * disorder);
                let mut s = EnsembleSpec::manybody(self.delta0, disorder, coupling, seed);
                if let EnsembleKind::Manybody {
                    states_per_realization,
                    ..
                } = &mut s.kind
                {
                    *states_per_realization = self.states_per_realization;
                }
                s
            }
            EnsembleChoice::Exchangeable => {
                EnsembleSpec::exchangeable(parse_profile(&self.profile)?, seed)
            }
        };
        spec.postprocess = Postprocess {
            shuffle: self.shuffle.unwrap_or(spec.postprocess.shuffle),
            randomize_phases: self
                .randomize_phases
                .unwrap_or(spec.postprocess.randomize_phases),
        };
        Ok(spec)
    }
}

#[derive(Args, Clone, Debug)]
struct OutputArgs {
    /// Master seed; drawn from the OS when absent and recorded.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; defaults to a file in $MFENTROPY_OUT_DIR when set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from the extension of --out when absent.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Args, Clone, Debug)]
struct MeasureArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Number of qubits in subsystem A (the leading qubits).
    #[arg(long, default_value_t = 1)]
    nu: u32,
    /// Explicit qubits of subsystem A, e.g. 0,2.
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<u32>>,
    /// Sample count per size.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Comma-separated observable labels.
    #[arg(long, default_value = DEFAULT_OBSERVABLES)]
    observables: String,
    /// Append moment-based predictions as theory: rows.
    #[arg(long)]
    theory: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand, Clone, Debug)]
enum Command {
    /// Draw states and write their amplitudes.
    Sample {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long)]
        nr: u32,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ensemble averages at one size.
    Measure {
        #[arg(long)]
        nr: u32,
        #[command(flatten)]
        args: MeasureArgs,
    },
    /// Ensemble averages over a range of sizes.
    Scan {
        /// Sizes, e.g. 4..8 (inclusive).
        #[arg(long)]
        nr: SizeList,
        #[command(flatten)]
        args: MeasureArgs,
    },
    /// Evaluate a closed-form prediction.
    Theory {
        #[arg(value_enum)]
        quantity: TheoryQuantity,
        /// State length N.
        #[arg(long = "N")]
        n_dim: u64,
        #[arg(long, default_value_t = 1)]
        nu: u32,
        /// Tangle power for tangle-power.
        #[arg(long)]
        power: Option<u32>,
        #[arg(long, value_enum, default_value = "exact-p2sq")]
        variant: VariantArg,
        #[arg(long)]
        p2: Option<f64>,
        #[arg(long)]
        p3: Option<f64>,
        #[arg(long)]
        p4: Option<f64>,
        #[arg(long)]
        p2sq: Option<f64>,
        /// Fixed squared moduli, one per line.
        #[arg(long)]
        moduli: Option<PathBuf>,
        /// Results CSV whose moment rows at --nr supply the moments.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        nr: Option<u32>,
        /// Digits printed after the decimal point.
        #[arg(long, default_value_t = 6)]
        precision: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Scaling fit of one observable from a results CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        observable: String,
        /// Moment order; reports D_q when given.
        #[arg(long)]
        q: Option<f64>,
        /// Weight by the reported standard errors.
        #[arg(long)]
        weighted: bool,
        /// Fit the absolute value of the means.
        #[arg(long)]
        absolute: bool,
        #[arg(long)]
        nr_min: Option<u32>,
        #[arg(long)]
        nr_max: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Oracle against theory; nonzero exit on any mismatch.
    Validate {
        /// Random modulus vectors per (N, n).
        #[arg(long, default_value_t = 20)]
        vectors: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// First-order prediction against the measured entropy.
    Fig1 {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value = "4..8")]
        nr: SizeList,
        /// Subsystem sizes: integers or "half".
        #[arg(long, value_delimiter = ',', default_value = "1,2,half")]
        nu: Vec<NuChoice>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Second-order comparison and scaling slopes.
    Fig2 {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value = "4..9")]
        nr: SizeList,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, value_enum, default_value = "per-sample")]
        s1_source: S1Arg,
        #[arg(long)]
        weighted: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    ExactP2sq,
    Factorized,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum S1Arg {
    PerSample,
    MomentLevel,
}

#[derive(Parser, Debug)]
#[command(
    name = "mfentropy",
    version,
    about = "Entanglement of random and multifractal states"
)]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Run a saved configuration instead of parsing a subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

fn resolve_output(out: &OutputArgs, name: &str) -> (Option<PathBuf>, OutputFormat) {
    let format = out.format.unwrap_or_else(|| match &out.out {
        Some(p) if p.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    });
    let path = out.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV).map(|dir| {
            let ext = match format {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            };
            Path::new(&dir).join(format!("{name}.{ext}"))
        })
    });
    (path, format)
}

fn labels(observables: &str) -> Result<Vec<String>> {
    let parsed = Observable::parse_list(observables)?;
    Ok(parsed.iter().map(ToString::to_string).collect())
}

fn build_config(cmd: Command) -> Result<RunConfig> {
    let seed_of = |o: &OutputArgs| o.seed.unwrap_or_else(rand::random);
    let (command, out) = match cmd {
        Command::Sample {
            ensemble,
            nr,
            count,
            output,
        } => {
            let seed = seed_of(&output);
            (
                CommandConfig::Sample {
                    ensemble: ensemble.spec(EnsembleChoice::Cue, seed)?,
                    n_r: nr,
                    count,
                },
                (output, seed),
            )
        }
        Command::Measure { nr, args } => {
            let seed = seed_of(&args.output);
            (
                CommandConfig::Measure {
                    ensemble: args.ensemble.spec(EnsembleChoice::Cue, seed)?,
                    n_r: nr,
                    nu: args.nu,
                    subset: args.subset,
                    samples: args.samples,
                    observables: labels(&args.observables)?,
                    theory: args.theory,
                },
                (args.output, seed),
            )
        }
        Command::Scan { nr, args } => {
            let seed = seed_of(&args.output);
            (
                CommandConfig::Scan {
                    ensemble: args.ensemble.spec(EnsembleChoice::Cue, seed)?,
                    sizes: nr.0,
                    nu: args.nu,
                    samples: args.samples,
                    observables: labels(&args.observables)?,
                    theory: args.theory,
                },
                (args.output, seed),
            )
        }
        Command::Theory {
            quantity,
            n_dim,
            nu,
            power,
            variant,
            p2,
            p3,
            p4,
            p2sq,
            moduli,
            input,
            nr,
            precision: _,
            output,
        } => {
            let mut inputs = TheoryInputs::default();
            if let Some(path) = input {
                let rows = read_rows_csv(File::open(&path)?)?;
                let want = nr.unwrap_or_else(|| n_dim.trailing_zeros());
                for r in rows.iter().filter(|r| r.n_r == want) {
                    if let Ok(Observable::Moment(_)) = r.observable.parse::<Observable>() {
                        inputs.moments.insert(r.observable.clone(), r.mean);
                    }
                }
            }
            for (label, v) in [("p2", p2), ("p3", p3), ("p4", p4), ("p2sq", p2sq)] {
                if let Some(v) = v {
                    inputs.moments.insert(label.to_string(), v);
                }
            }
            if let Some(path) = moduli {
                inputs.moduli = Some(load_moduli_csv(path)?);
            }
            let variant = match variant {
                VariantArg::ExactP2sq => SecondOrderVariant::ExactP2sq,
                VariantArg::Factorized => SecondOrderVariant::Factorized,
            };
            (
                CommandConfig::Theory {
                    quantity,
                    n_dim,
                    nu,
                    power,
                    variant,
                    inputs,
                },
                (output, 0),
            )
        }
        Command::Fit {
            input,
            observable,
            q,
            weighted,
            absolute,
            nr_min,
            nr_max,
            output,
        } => {
            let fit_range = match (nr_min, nr_max) {
                (None, None) => None,
                (a, b) => Some((a.unwrap_or(0), b.unwrap_or(u32::MAX))),
            };
            (
                CommandConfig::Fit {
                    input,
                    observable,
                    q,
                    weighted,
                    absolute,
                    fit_range,
                },
                (output, 0),
            )
        }
        Command::Validate { vectors, output } => {
            let seed = seed_of(&output);
            (
                CommandConfig::Validate(ValidateConfig {
                    vectors,
                    seed,
                    ..ValidateConfig::default()
                }),
                (output, seed),
            )
        }
        Command::Fig1 {
            ensemble,
            nr,
            nu,
            samples,
            output,
        } => {
            let seed = seed_of(&output);
            (
                CommandConfig::Fig1(Fig1Config {
                    ensemble: ensemble.spec(EnsembleChoice::Intermediate, seed)?,
                    sizes: nr.0,
                    nus: nu,
                    samples,
                }),
                (output, seed),
            )
        }
        Command::Fig2 {
            ensemble,
            nr,
            samples,
            s1_source,
            weighted,
            output,
        } => {
            let seed = seed_of(&output);
            (
                CommandConfig::Fig2(Fig2Config {
                    ensemble: ensemble.spec(EnsembleChoice::Intermediate, seed)?,
                    sizes: nr.0,
                    samples,
                    s1_source: match s1_source {
                        S1Arg::PerSample => S1Source::PerSample,
                        S1Arg::MomentLevel => S1Source::MomentLevel,
                    },
                    weighted,
                }),
                (output, seed),
            )
        }
    };
    let ((output_args, seed), name) = (out, command.name());
    let (output, format) = resolve_output(&output_args, name);
    Ok(RunConfig {
        command,
        seed,
        output,
        format,
    }
    .resolved())
}

fn rows_summary(rows: &[ResultRow]) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&format!(
            "n_r={:<3} {:<24} {:>14.8} ± {:.2e}  (M={})\n",
            r.n_r, r.observable, r.mean, r.stderr, r.samples
        ));
    }
    s
}

fn parse_observables(labels: &[String]) -> Result<Vec<Observable>> {
    labels.iter().map(|l| l.parse()).collect()
}

fn bipartition(n_r: u32, nu: u32, subset: &Option<Vec<u32>>) -> Result<Bipartition> {
    match subset {
        Some(s) => Bipartition::new(n_r, s.clone()),
        None => Bipartition::leading(n_r, nu),
    }
}

fn evaluate_theory(
    quantity: TheoryQuantity,
    n_dim: u64,
    nu: u32,
    power: Option<u32>,
    variant: SecondOrderVariant,
    inputs: &TheoryInputs,
) -> Result<f64> {
    let m = Moments {
        table: inputs.table()?,
        moduli: inputs.moduli.as_deref().map(|w| FixedModuli { weights: w }),
    };
    if let Some(w) = &inputs.moduli {
        if w.len() as u64 != n_dim {
            return Err(invalid!("{} moduli given for N = {n_dim}", w.len()));
        }
    }
    let p2 = || {
        m.power_sum_mean(&Partition::new(vec![2]).expect("valid"))
            .ok_or_else(|| Error::MissingData("<p2> required (--p2, --input or --moduli)".into()))
    };
    match quantity {
        TheoryQuantity::Page => page_entropy(n_dim),
        TheoryQuantity::Tangle => mean_tangle_pred(n_dim, p2()?),
        TheoryQuantity::Linear => mean_linear_entropy_pred(n_dim, nu, p2()?),
        TheoryQuantity::FirstOrder => first_order_entropy_pred(n_dim, nu, p2()?),
        TheoryQuantity::TangleSq => mean_tangle_sq_pred(n_dim, &m),
        TheoryQuantity::TanglePower => {
            let n = power.ok_or_else(|| invalid!("tangle-power needs --power"))?;
            mean_tangle_power_pred(n, n_dim, &m)
        }
        TheoryQuantity::SecondOrder => second_order_entropy_pred(n_dim, &m, variant),
    }
}

fn fit_rows(
    rows: &[ResultRow],
    observable: &str,
    weighted: bool,
    absolute: bool,
    fit_range: Option<(u32, u32)>,
) -> Result<ScalingFit> {
    let (lo, hi) = fit_range.unwrap_or((0, u32::MAX));
    let mut picked: Vec<&ResultRow> = rows
        .iter()
        .filter(|r| r.observable == observable && (lo..=hi).contains(&r.n_r))
        .collect();
    picked.sort_by_key(|r| r.n_r);
    if picked.is_empty() {
        return Err(Error::MissingData(format!(
            "no rows for observable {observable:?}"
        )));
    }
    let sizes: Vec<u32> = picked.iter().map(|r| r.n_r).collect();
    let values: Vec<f64> = picked
        .iter()
        .map(|r| if absolute { r.mean.abs() } else { r.mean })
        .collect();
    let errors: Vec<f64> = picked.iter().map(|r| r.stderr).collect();
    fit_scaling(&sizes, &values, weighted.then_some(errors.as_slice()))
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::InconclusivePass => "pass (inconclusive: < 3 SE)",
        Verdict::Fail => "FAIL",
    }
}

/// Runs a resolved configuration without writing anything.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    match &config.command {
        CommandConfig::Sample {
            ensemble,
            n_r,
            count,
        } => {
            let states = ensemble.samples(*n_r, *count)?;
            out.summary = format!("{} states of {} qubits\n", states.len(), n_r);
            out.report = Some(serde_json::to_value(&states)?);
        }
        CommandConfig::Measure {
            ensemble,
            n_r,
            nu,
            subset,
            samples,
            observables,
            theory,
        } => {
            let b = bipartition(*n_r, *nu, subset)?;
            out.rows = experiments::measure_size(
                ensemble,
                &b,
                &parse_observables(observables)?,
                *samples,
                *theory,
            )?;
            out.summary = rows_summary(&out.rows);
        }
        CommandConfig::Scan {
            ensemble,
            sizes,
            nu,
            samples,
            observables,
            theory,
        } => {
            let obs = parse_observables(observables)?;
            for &n in sizes {
                ensemble.validate_for(n)?;
                Bipartition::leading(n, *nu)?;
            }
            for &n in sizes {
                let b = Bipartition::leading(n, *nu)?;
                out.rows.extend(experiments::measure_size(
                    ensemble, &b, &obs, *samples, *theory,
                )?);
            }
            out.summary = rows_summary(&out.rows);
        }
        CommandConfig::Theory {
            quantity,
            n_dim,
            nu,
            power,
            variant,
            inputs,
        } => {
            let v = evaluate_theory(*quantity, *n_dim, *nu, *power, *variant, inputs)?;
            if n_dim.is_power_of_two() {
                out.rows.push(ResultRow::new(
                    n_dim.trailing_zeros(),
                    format!("{}{quantity}", experiments::THEORY_PREFIX),
                    crate::statistics::Estimate::exact(v),
                ));
            }
            out.report = Some(serde_json::json!({ "value": v }));
            out.summary = v.to_string();
        }
        CommandConfig::Fit {
            input,
            observable,
            q,
            weighted,
            absolute,
            fit_range,
        } => {
            let rows = read_rows_csv(File::open(input)?)?;
            let fit = fit_rows(&rows, observable, *weighted, *absolute, *fit_range)?;
            let mut s = format!(
                "slope {:.6} ± {:.6}, intercept {:.6} over n_r {:?}\n",
                fit.slope, fit.slope_stderr, fit.intercept, fit.sizes
            );
            let dimension = match q {
                Some(q) => {
                    let d = fractal_dimension(*q, &fit)?;
                    s.push_str(&format!("D_{q} = {d:.6}\n"));
                    Some(d)
                }
                None => None,
            };
            out.report = Some(serde_json::json!({ "fit": fit, "dimension": dimension }));
            out.summary = s;
        }
        CommandConfig::Validate(v) => {
            let checks = validate_suite(v)?;
            let mut s = String::new();
            for c in &checks {
                s.push_str(&format!(
                    "{} {:<44} max error {:.3e} (tolerance {:.0e})\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.max_error,
                    c.tolerance
                ));
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                out.failure = Some(format!("{failed} validation checks failed"));
            }
            out.report = Some(serde_json::to_value(&checks)?);
            out.summary = s;
        }
        CommandConfig::Fig1(cfg) => {
            let report = fig1_pipeline(cfg)?;
            let mut s = String::new();
            for p in &report.points {
                s.push_str(&format!(
                    "n_r={} nu={} (series {}) 1/<p2>={:.3} <S>={:.6} first-order={:.6} rel={:+.3e} ± {:.1e}\n",
                    p.n_r, p.nu, p.series, p.mean_ipr, p.entropy.mean, p.first_order.mean,
                    p.relative_deviation.mean, p.relative_deviation.stderr
                ));
            }
            for c in &report.checks {
                s.push_str(&format!(
                    "series nu={}: prediction above <S>: {}, relative deviation decreasing: {}\n",
                    c.series, c.above, c.decreasing
                ));
            }
            out.rows = report.rows();
            out.report = Some(serde_json::to_value(&report)?);
            out.summary = s;
        }
        CommandConfig::Fig2(cfg) => {
            let report = fig2_pipeline(cfg)?;
            let mut s = String::new();
            for p in &report.points {
                s.push_str(&format!(
                    "n_r={} 1-<S1>/<S>={:+.4e} 1-<S2>/<S>={:+.4e} factorized={:+.4e} <p2^2>={:.4e}  S2 closer: {}, factorized: {}\n",
                    p.n_r,
                    p.rel_s1.mean,
                    p.rel_s2.mean,
                    p.rel_s2_factorized.mean,
                    p.p2sq.mean,
                    verdict_word(p.second_order_verdict()),
                    verdict_word(p.factorized_verdict()),
                ));
            }
            s.push_str(&format!(
                "slope of log2|1-<S1>/<S>|: {:.4} ± {:.4}\nslope of log2<p2^2>: {:.4} ± {:.4}\n",
                report.s1_fit.slope,
                report.s1_fit.slope_stderr,
                report.p2sq_fit.slope,
                report.p2sq_fit.slope_stderr
            ));
            out.rows = report.rows();
            out.report = Some(serde_json::to_value(&report)?);
            out.summary = s;
        }
    }
    Ok(out)
}

fn config_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

fn write_states_csv(path: &Path, states: &[StateVector]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["state", "component", "re", "im"])?;
    for (i, psi) in states.iter().enumerate() {
        for (k, a) in psi.amplitudes().iter().enumerate() {
            w.write_record([
                i.to_string(),
                k.to_string(),
                a.re.to_string(),
                a.im.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the artifacts of a finished run.
pub fn write_output(config: &RunConfig, out: &RunOutput) -> Result<Option<PathBuf>> {
    let Some(path) = &config.output else {
        return Ok(None);
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    match config.format {
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "config": config,
                "rows": out.rows,
                "report": out.report,
            });
            let mut f = BufWriter::new(File::create(path)?);
            serde_json::to_writer_pretty(&mut f, &doc)?;
            f.flush()?;
        }
        OutputFormat::Csv => {
            match &config.command {
                CommandConfig::Sample { .. } => {
                    let states: Vec<StateVector> =
                        serde_json::from_value(out.report.clone().unwrap_or_default())?;
                    write_states_csv(path, &states)?;
                }
                _ => write_rows_csv(BufWriter::new(File::create(path)?), &out.rows)?,
            }
            std::fs::write(config_sidecar(path), config.to_json()?)?;
            if let Some(report) = &out.report {
                if !matches!(config.command, CommandConfig::Sample { .. }) {
                    let mut s = path.as_os_str().to_owned();
                    s.push(".report.json");
                    std::fs::write(PathBuf::from(s), serde_json::to_string_pretty(report)?)?;
                }
            }
        }
    }
    Ok(Some(path.clone()))
}

/// Exit status for an error: 2 for bad input, 1 for failures while running.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::MissingData(_) | Error::Capacity(_) => 2,
        _ => 1,
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    // Accept both a bare config and a JSON artifact embedding one.
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let config = match value.get("config") {
        Some(c) => serde_json::from_value(c.clone())?,
        None => serde_json::from_value(value)?,
    };
    Ok(RunConfig::resolved(config))
}

fn execute_inner(cli: Cli) -> Result<i32> {
    let precision = match &cli.command {
        Some(Command::Theory { precision, .. }) => *precision,
        _ => 6,
    };
    let config = match (&cli.config, cli.command) {
        (Some(path), None) => load_config(path)?,
        (Some(_), Some(_)) => {
            return Err(invalid!("--config cannot be combined with a subcommand"))
        }
        (None, Some(cmd)) => build_config(cmd)?,
        (None, None) => return Err(invalid!("a subcommand or --config is required")),
    };
    let work = || run(&config);
    let out = match cli.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let written = write_output(&config, &out)?;
    let stdout = std::io::stdout();
    let mut so = stdout.lock();
    match &config.command {
        CommandConfig::Theory { .. } => {
            let v = out
                .report
                .as_ref()
                .and_then(|r| r["value"].as_f64())
                .unwrap_or(f64::NAN);
            writeln!(so, "{v:.precision$}")?;
        }
        _ => {
            if !matches!(config.command, CommandConfig::Fit { .. }) {
                writeln!(so, "seed: {}", config.seed)?;
            }
            write!(so, "{}", out.summary)?;
            if let Some(p) = written {
                writeln!(so, "wrote {}", p.display())?;
            }
        }
    }
    if let Some(msg) = &out.failure {
        eprintln!("error: {msg}");
        return Ok(1);
    }
    Ok(0)
}

/// Parses `argv` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
