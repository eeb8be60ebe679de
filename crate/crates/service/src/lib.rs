//! Verification service around the private significance test: CSV ingestion,
//! per-session privacy budgets, a JSON-over-HTTP API and the `dpsig` CLI.

pub mod config;
pub mod error;
pub mod http;
pub mod ingest;
pub mod ledger;
pub mod query;
pub mod service;

pub use config::Config;
pub use error::{Result, ServiceError};
pub use ingest::{ingest_csv, Table};
pub use ledger::{BudgetLedger, BudgetStatus, LedgerEntry};
pub use query::{VerificationQuery, VerificationResult};
pub use service::VerificationService;
