//! Large-sample type-II error next to its closed-form upper bound.

use dpsig_core::power::{asymptotic_type_ii, type_ii_upper_bound};
use dpsig_core::PrivacyParams;

fn main() -> Result<(), dpsig_core::Error> {
    let alpha = 0.05;
    println!(
        "{:>5} {:>4} {:>5} {:>12} {:>12}",
        "eps", "M", "a", "asymptotic", "bound"
    );
    for epsilon in [0.5, 1.0, 2.5] {
        for m in [10, 25, 50] {
            for a in [3.0, 5.0] {
                let params = PrivacyParams::new(epsilon, m, a)?;
                println!(
                    "{epsilon:>5} {m:>4} {a:>5} {:>12.3e} {:>12.3e}",
                    asymptotic_type_ii(&params, alpha, 10_000, 1)?,
                    type_ii_upper_bound(&params, alpha)?
                );
            }
        }
    }
    Ok(())
}
