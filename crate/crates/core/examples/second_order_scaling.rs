//! Relative error of the first- and second-order entropy estimates for
//! intermediate-map eigenvectors, with scaling slopes.
//!
//! cargo run --release --example second_order_scaling -- 1/7 20000

use mfentropy::cli::{fig2_pipeline, Fig2Config, S1Source};
use mfentropy::ensembles::{EnsembleSpec, Gamma};

fn main() -> mfentropy::Result<()> {
    let mut args = std::env::args().skip(1);
    let gamma: Gamma = args.next().unwrap_or_else(|| "1/3".into()).parse()?;
    let samples: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let report = fig2_pipeline(&Fig2Config {
        ensemble: EnsembleSpec::intermediate(gamma, 1),
        sizes: (4..=8).collect(),
        samples,
        s1_source: S1Source::PerSample,
        weighted: false,
    })?;
    println!("n_r  1-<S1>/<S>   1-<S2>/<S>   factorized   <p2^2>");
    for p in &report.points {
        println!(
            "{:>3} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.4e}",
            p.n_r, p.rel_s1.mean, p.rel_s2.mean, p.rel_s2_factorized.mean, p.p2sq.mean
        );
    }
    println!(
        "slope |1-<S1>/<S>| = {:.3} ± {:.3}",
        report.s1_fit.slope, report.s1_fit.slope_stderr
    );
    println!(
        "slope <p2^2>       = {:.3} ± {:.3}",
        report.p2sq_fit.slope, report.p2sq_fit.slope_stderr
    );
    Ok(())
}
