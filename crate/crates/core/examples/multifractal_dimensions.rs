//! Fractal dimensions D_2, D_3, D_4 of intermediate-map eigenvectors.
//!
//! cargo run --release --example multifractal_dimensions -- 1/3

use mfentropy::ensembles::{EnsembleSpec, Gamma};
use mfentropy::entanglement::Bipartition;
use mfentropy::statistics::{ensemble_average, fit_scaling, fractal_dimension, Observable};

fn main() -> mfentropy::Result<()> {
    let gamma: Gamma = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "1/3".into())
        .parse()?;
    let spec = EnsembleSpec::intermediate(gamma, 7);
    let sizes: Vec<u32> = (4..=8).collect();
    let qs = [2u32, 3, 4];
    let obs: Vec<Observable> = qs.iter().map(|&q| Observable::p(q)).collect();

    let mut values = vec![Vec::new(); qs.len()];
    for &n in &sizes {
        let b = Bipartition::leading(n, 1)?;
        let s = ensemble_average(&spec, n, &obs, 4096, &b)?;
        for (v, o) in values.iter_mut().zip(&obs) {
            v.push(s.mean(o)?);
        }
        println!("n_r = {n}: <p2> = {:.4e}", values[0].last().unwrap());
    }
    for (q, v) in qs.iter().zip(&values) {
        let fit = fit_scaling(&sizes, v, None)?;
        println!(
            "D_{q} = {:.3} (slope {:.3} ± {:.3})",
            fractal_dimension(*q as f64, &fit)?,
            fit.slope,
            fit.slope_stderr
        );
    }
    Ok(())
}
