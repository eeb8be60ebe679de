//! Worst-case agreement of the private test with the t-test, as a function
//! of effect size, written as CSV.

use dpsig_core::power::{
    default_effect_grid, matching_curves_with, write_matching_csv, NormalModel, DEFAULT_A_GRID,
    DEFAULT_EPSILON_GRID, DEFAULT_M_GRID,
};

fn main() -> Result<(), dpsig_core::Error> {
    let n_mc = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10_000);
    let curves = matching_curves_with(
        &NormalModel::default(),
        &default_effect_grid(),
        &DEFAULT_EPSILON_GRID,
        &DEFAULT_M_GRID,
        &DEFAULT_A_GRID,
        0.05,
        n_mc,
        17,
    )?;
    write_matching_csv(&curves, n_mc, 17, std::io::stdout().lock())
}
