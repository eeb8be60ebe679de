use std::path::{Path, PathBuf};

use dpsig_core::power::{DEFAULT_A_GRID, DEFAULT_EPSILON_GRID, DEFAULT_M_GRID};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};

/// JSON configuration. Every field is optional in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub bind: String,
    pub m_grid: Vec<usize>,
    pub a_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    pub alphas: Vec<f64>,
    pub lambda0: f64,
    pub alpha0: f64,
    /// Draws for null references built by the service and `pvalue`.
    pub reference_n_mc: usize,
    /// Draws for power grids and loss tables.
    pub power_n_mc: usize,
    /// Directory for per-session JSON-lines ledgers; none keeps ledgers in
    /// memory only.
    pub ledger_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            m_grid: DEFAULT_M_GRID.to_vec(),
            a_grid: DEFAULT_A_GRID.to_vec(),
            epsilon_grid: DEFAULT_EPSILON_GRID.to_vec(),
            alphas: vec![0.05],
            lambda0: 0.2,
            alpha0: 0.95,
            reference_n_mc: 100_000,
            power_n_mc: 100_000,
            ledger_dir: None,
        }
    }
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let c: Config =
            serde_json::from_str(r#"{"bind": "0.0.0.0:9000", "m_grid": [10]}"#).unwrap();
        assert_eq!(c.bind, "0.0.0.0:9000");
        assert_eq!(c.m_grid, vec![10]);
        assert_eq!(c.a_grid.len(), 10);
        assert!(serde_json::from_str::<Config>(r#"{"bnd": 1}"#).is_err());
    }
}
