//! Releases a noisy truncated t-statistic for one coefficient.

use dpsig_core::{make_partition, noiseless_statistic, release_statistic, Dataset, PrivacyParams};

fn main() -> Result<(), dpsig_core::Error> {
    let n = 2_000;
    let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 1000) as f64 / 100.0).collect();
    let y: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, v)| 1.0 + 0.05 * v + (((i * 104_729) % 997) as f64 / 997.0 - 0.5) * 4.0)
        .collect();
    let data = Dataset::from_columns(y, &[x], &["x"])?;

    let params = PrivacyParams::new(1.0, 25, 2.0)?;
    let seed = 42;
    let plan = make_partition(data.n(), params.m, seed)?;
    let clean = noiseless_statistic(&data, 1, 0.0, params.a, &plan)?;
    let released = release_statistic(&data, 1, 0.0, &params, seed)?;

    println!("subset sizes      {:?}", plan.sizes());
    println!("sensitivity       {:.4}", params.sensitivity());
    println!("noise scale       {:.4}", params.noise_scale());
    println!("noiseless value   {clean:.4}");
    println!(
        "released value    {:.4} (sign {:?})",
        released.value, released.sign
    );
    Ok(())
}
