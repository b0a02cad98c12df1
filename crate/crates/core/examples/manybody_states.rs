//! Central eigenstates of the disordered spin model: IPR, entropy and the
//! first-order prediction.
//!
//! cargo run --release --example manybody_states

use mfentropy::ensembles::EnsembleSpec;
use mfentropy::entanglement::Bipartition;
use mfentropy::statistics::{ensemble_average, Observable};
use mfentropy::theory::first_order_entropy_pred;

fn main() -> mfentropy::Result<()> {
    let delta0 = 1.0;
    let spec = EnsembleSpec::manybody(delta0, delta0, 1.5 * delta0, 99);
    println!("n_r  nu  1/<p2>     <S>       first order");
    for n_r in 4..=8u32 {
        for nu in [1, n_r / 2] {
            let b = Bipartition::leading(n_r, nu)?;
            let obs = [Observable::p(2), Observable::Entropy];
            let s = ensemble_average(&spec, n_r, &obs, 2000, &b)?;
            let p2 = s.mean(&Observable::p(2))?;
            let pred = first_order_entropy_pred(1 << n_r, nu, p2)?;
            println!(
                "{n_r:>3} {nu:>3} {:>9.3} {:>9.5} {:>12.5}",
                1.0 / p2,
                s.mean(&Observable::Entropy)?,
                pred
            );
        }
    }
    Ok(())
}
