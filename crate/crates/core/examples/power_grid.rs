//! Writes type-II errors, losses, asymptotic errors and the closed-form
//! bound over a small grid as long-format CSV on stdout.

use dpsig_core::power::write_grid_csv;
use dpsig_core::{power_grid, PowerGrid};

fn main() -> Result<(), dpsig_core::Error> {
    let grid = PowerGrid {
        m_grid: vec![10, 25, 50],
        a_grid: vec![1.0, 2.0, 4.0],
        epsilons: vec![0.5, 1.0, 2.5],
        n_mc: 20_000,
        seed: 3,
        ..PowerGrid::default()
    };
    let records = power_grid(&grid)?;
    write_grid_csv(&records, std::io::stdout().lock())
}
