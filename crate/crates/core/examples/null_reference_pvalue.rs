//! Tests a released value against a simulated null reference, with the
//! reference cached on disk.

use dpsig_core::{critical_value, decide_value, p_value, PrivacyParams, ReferenceCache};

fn main() -> Result<(), dpsig_core::Error> {
    let released: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4.2);
    let params = PrivacyParams::new(1.0, 25, 2.0)?;

    let dir = std::env::temp_dir().join("dpsig-reference-cache");
    let cache = ReferenceCache::new(&dir)?;
    let reference = cache.get_or_build(&params, 100_000, 7)?;
    println!(
        "reference cached at {}",
        cache.path_for(&params, 100_000, 7).display()
    );

    for alpha in [0.1, 0.05, 0.01] {
        let d = decide_value(released, &reference, alpha)?;
        println!(
            "alpha {alpha:<5} critical {:.3}  reject {}",
            critical_value(&reference, alpha)?,
            d.reject
        );
    }
    println!(
        "p-value of {released}: {:.5}",
        p_value(released, &reference)
    );
    Ok(())
}
