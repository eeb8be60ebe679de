use dpsig_core::reference::DEFAULT_REFERENCE_DRAWS;
use dpsig_core::release::Sign;
use serde::{Deserialize, Serialize};

fn default_alpha() -> f64 {
    0.05
}

fn default_n_mc() -> usize {
    DEFAULT_REFERENCE_DRAWS
}

/// A request to release and test one coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationQuery {
    pub dataset_id: String,
    pub response_column: String,
    pub predictor_columns: Vec<String>,
    /// A predictor name, or `"(Intercept)"`.
    pub coefficient: String,
    #[serde(default)]
    pub null_value: f64,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub a: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub query_id: String,
    pub released_value: f64,
    pub sign: Sign,
    pub p_value: f64,
    pub reject: bool,
    pub critical_value: f64,
    pub epsilon_charged: f64,
    pub seed_used: u64,
}
