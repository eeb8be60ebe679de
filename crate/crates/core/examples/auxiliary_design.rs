//! Loss table built from regressions simulated on an auxiliary design
//! instead of the normal model.

use dpsig_core::power::DesignSimulation;
use dpsig_core::select_params;
use dpsig_core::selection::{build_loss_table_with, LossTableConfig};
use nalgebra::DMatrix;

fn main() -> Result<(), dpsig_core::Error> {
    let n = 1_000;
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => ((i * 7919) % 100) as f64 / 10.0,
        _ => ((i * 104_729) % 2) as f64,
    });
    let source = DesignSimulation::new(design, 1, 2.0)?;
    let config = LossTableConfig {
        epsilon: 1.5,
        m_grid: vec![10, 25],
        a_grid: vec![1.0, 2.0, 3.0],
        n_mc: 10_000,
        seed: 5,
        ..LossTableConfig::default()
    };
    let table = build_loss_table_with(&source, &config)?;
    print!("{}", table.render_text(Some(0.1)));
    match select_params(&table, 0.1) {
        Ok(s) => println!("chosen: M = {}, a = {}", s.m, s.a),
        Err(e) => println!("{e}"),
    }
    Ok(())
}
