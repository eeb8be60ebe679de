//! Differentially private significance tests for linear regression
//! coefficients.
//!
//! The data holder fits OLS on `M` disjoint subsets, truncates each subset
//! t-statistic to `[−a, a]`, and releases the rescaled mean plus Laplace
//! noise. Analysts test the released value against a simulated null
//! reference, which needs no access to the data. The [`power`] and
//! [`selection`] modules evaluate the test by simulation and choose `(M, a)`.
//!
//! ```
//! use dpsig_core::{
//!     critical_value, decide, release_statistic, simulate_null_reference, Dataset,
//!     PrivacyParams,
//! };
//!
//! let x: Vec<f64> = (0..400).map(|i| (i % 20) as f64).collect();
//! let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| 0.5 * v + ((i * 7) % 5) as f64).collect();
//! let data = Dataset::from_columns(y, &[x], &["x"]).unwrap();
//!
//! let params = PrivacyParams::new(1.0, 10, 2.0).unwrap();
//! let released = release_statistic(&data, 1, 0.0, &params, 7).unwrap();
//! let reference = simulate_null_reference(&params, 20_000, 11).unwrap();
//! let decision = decide(&released, &reference, 0.05).unwrap();
//! assert_eq!(decision.reject, released.value.abs() >= critical_value(&reference, 0.05).unwrap());
//! ```

pub mod dist;
pub mod draws;
pub mod error;
pub mod power;
pub mod reference;
pub mod regression;
pub mod release;
pub mod rng;
pub mod selection;

pub use error::{Error, Result};
pub use power::{
    asymptotic_type_ii, asymptotic_type_ii_mc, distance_tail_oracles, loss_sgn, loss_sig,
    matching_probabilities, power_grid, power_report, q0_for, simulate_alternative, type_ii_rate,
    type_ii_upper_bound, DesignSimulation, NormalModel, PartitionLocation, PowerGrid, PowerReport,
    StatisticSource,
};
pub use reference::{
    critical_value, decide, decide_value, p_value, simulate_null_reference, ReferenceCache,
    ReferenceDistribution, TestDecision,
};
pub use regression::{fit_ols, subset_fit, t_statistic, Dataset, RegressionFit};
pub use release::{
    aggregate_truncated, make_partition, noiseless_statistic, release_statistic, truncate,
    PartitionPlan, PrivacyParams, ReleasedStatistic, Sign,
};
pub use selection::{build_loss_table, select_params, LossRow, LossTable, Selection};
