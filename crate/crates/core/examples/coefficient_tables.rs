//! Power-sum to monomial rows and the exact integer coefficients of ⟨τⁿ⟩.
//!
//! cargo run --release --example coefficient_tables -- 16

use mfentropy::partitions::{
    enumerate_partitions, power_sum_to_monomial, tangle_power_coefficients,
};

fn main() -> mfentropy::Result<()> {
    let n_dim: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(16);

    println!("p_λ = Σ_μ L_λμ m_μ for |λ| = 4");
    for lambda in enumerate_partitions(4) {
        let row: Vec<String> = power_sum_to_monomial(&lambda)
            .iter()
            .map(|(mu, c)| format!("{c}·m{mu}"))
            .collect();
        println!("  p{lambda} = {}", row.join(" + "));
    }

    for n in 1..=3 {
        let table = tangle_power_coefficients(n, n_dim)?;
        println!(
            "\n<tau^{n}> at N = {n_dim}: {} nonzero correlators",
            table.len()
        );
        for (lambda, c) in table.iter() {
            println!("  c{lambda:<14} {c}");
        }
    }

    let json = tangle_power_coefficients(2, n_dim)?.to_json()?;
    println!("\nserialized n = 2 table: {json}");
    Ok(())
}
