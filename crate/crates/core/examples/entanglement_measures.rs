//! Entanglement measures of individual states and the two series
//! representations of the entropy.

use mfentropy::ensembles::{sample_cue_state, StateVector};
use mfentropy::entanglement::{
    entropy_expansion_mixed, entropy_from_tangle, linear_entropy, mixed_expansion_converges,
    reduced_density_matrix, tangle, truncated_entropy_series, von_neumann_entropy, Bipartition,
};
use mfentropy::seed;

fn main() -> mfentropy::Result<()> {
    let bell = StateVector::from_real(&[
        std::f64::consts::FRAC_1_SQRT_2,
        0.0,
        0.0,
        std::f64::consts::FRAC_1_SQRT_2,
    ])?;
    let b = Bipartition::leading(2, 1)?;
    println!(
        "Bell state: S = {}, tau = {}",
        von_neumann_entropy(&reduced_density_matrix(&bell, &b)?)?,
        tangle(&bell, 0)?
    );

    let mut rng = seed::stream(5, &[]);
    let psi = sample_cue_state(6, &mut rng)?;
    let one = Bipartition::leading(6, 1)?;
    let rho = reduced_density_matrix(&psi, &one)?;
    let tau = tangle(&psi, 0)?;
    println!("\nrandom 6-qubit state, qubit 0:");
    println!("  S          = {:.12}", von_neumann_entropy(&rho)?);
    println!("  S(tau)     = {:.12}", entropy_from_tangle(tau)?);
    for m in [1, 2, 4, 8] {
        println!(
            "  S_{m:<2}       = {:.12}",
            truncated_entropy_series(tau, m)
        );
    }

    let three = Bipartition::leading(6, 3)?;
    let rho3 = reduced_density_matrix(&psi, &three)?;
    println!(
        "\nqubits 0,1,2: S = {:.6}, S_L = {:.6}",
        von_neumann_entropy(&rho3)?,
        linear_entropy(&psi, &three)?
    );
    println!(
        "  expansion converges: {}",
        mixed_expansion_converges(&rho3)?
    );
    for order in [1, 2, 4, 8] {
        println!(
            "  expansion around 1/8 to order {order}: {:.6}",
            entropy_expansion_mixed(&rho3, order)?
        );
    }
    Ok(())
}
