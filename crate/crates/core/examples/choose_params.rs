//! Builds a loss table on the default grid and picks `(M, a)`.
//!
//! ```text
//! cargo run --release -p dpsig-core --example choose_params -- [epsilon] [n_mc] [bound] [over-root-m]
//! ```

use std::time::Instant;

use dpsig_core::power::{NormalModel, PartitionLocation, DEFAULT_A_GRID, DEFAULT_M_GRID};
use dpsig_core::select_params;
use dpsig_core::selection::{build_loss_table_with, LossTableConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let epsilon: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.5);
    let n_mc: usize = args
        .next()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(100_000);
    let bound: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.1);
    // any fourth argument switches subset t-statistics to location mu/sqrt(M)
    let location = match args.next() {
        Some(_) => PartitionLocation::EffectOverSqrtM,
        None => PartitionLocation::SqrtMTimesEffect,
    };

    let start = Instant::now();
    let config = LossTableConfig {
        epsilon,
        m_grid: DEFAULT_M_GRID.to_vec(),
        a_grid: DEFAULT_A_GRID.to_vec(),
        n_mc,
        seed: 2024,
        ..LossTableConfig::default()
    };
    let table = build_loss_table_with(&NormalModel::new(location), &config)?;
    println!("loss_sig at epsilon = {epsilon}, alpha = 0.05, lambda0 = 0.2, {location:?} ({n_mc} draws per cell)\n");
    print!("{}", table.render_text(Some(bound)));
    println!("\nbuilt in {:.1?}", start.elapsed());

    match select_params(&table, bound) {
        Ok(s) => println!("chosen: M = {}, a = {} (loss {:.3})", s.m, s.a, s.loss_sig),
        Err(e) => println!("no choice: {e}"),
    }
    Ok(())
}
