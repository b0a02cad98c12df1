//! Haar-random states reproduce the exact mean single-qubit entropy.
//!
//! cargo run --release --example page_value -- 6 20000

use mfentropy::ensembles::EnsembleSpec;
use mfentropy::entanglement::Bipartition;
use mfentropy::statistics::{ensemble_average, Observable};
use mfentropy::theory::page_entropy;

fn main() -> mfentropy::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_r: u32 = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let samples: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);

    let spec = EnsembleSpec::cue(2024);
    let b = Bipartition::leading(n_r, 1)?;
    let obs = [Observable::Entropy, Observable::p(2)];
    let summary = ensemble_average(&spec, n_r, &obs, samples, &b)?;
    let s = summary.get(&Observable::Entropy).expect("measured");
    let p2 = summary.get(&Observable::p(2)).expect("measured");
    let n_dim = 1u64 << n_r;
    let page = page_entropy(n_dim)?;

    println!("N = {n_dim}, M = {samples}");
    println!("<S>   = {:.6} ± {:.6}", s.mean, s.stderr);
    println!("Page  = {page:.6}   z = {:+.2}", s.z_score(page));
    println!(
        "<p2>  = {:.6e}   2/(N+1) = {:.6e}",
        p2.mean,
        2.0 / (n_dim as f64 + 1.0)
    );
    Ok(())
}
