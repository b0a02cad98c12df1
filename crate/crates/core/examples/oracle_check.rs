//! Brute-force phase averages against the moment-based predictions.

use mfentropy::cli::{validate_suite, ValidateConfig};
use mfentropy::oracle::{exact_phase_average_tangle_power, OracleProblem};
use mfentropy::partitions::FixedModuli;
use mfentropy::theory::mean_tangle_power_pred;

fn main() -> mfentropy::Result<()> {
    let moduli = vec![0.4, 0.25, 0.15, 0.1, 0.05, 0.03, 0.01, 0.01];
    for n in 1..=3 {
        let oracle = exact_phase_average_tangle_power(&OracleProblem::new(moduli.clone(), n, 0)?)?;
        let theory = mean_tangle_power_pred(n, 8, &FixedModuli { weights: &moduli })?;
        println!("<tau^{n}>: oracle {oracle:.15}  theory {theory:.15}");
    }

    println!();
    for c in validate_suite(&ValidateConfig::default())? {
        println!(
            "{} {:<44} {:.2e}",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.max_error
        );
    }
    Ok(())
}
