//! In-memory verification service: datasets, budget sessions and queries.
//!
//! Budgets are scoped to a session, not to a dataset. Two sessions opened on
//! the same dataset spend independent budgets, so a deployment that needs a
//! global per-dataset limit has to enforce it outside this type. Every
//! release is charged in full; the cheaper rule for disjoint subsets is never
//! applied because the service cannot verify disjointness.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use chrono::Utc;
use dpsig_core::reference::MIN_REFERENCE_DRAWS;
use dpsig_core::regression::INTERCEPT_NAME;
use dpsig_core::rng::{derive_seed, entropy_seed};
use dpsig_core::{
    decide, release_statistic, simulate_null_reference, PrivacyParams, ReferenceDistribution,
};

use crate::error::{Result, ServiceError};
use crate::ingest::Table;
use crate::ledger::{BudgetLedger, BudgetStatus, LedgerEntry};
use crate::query::{VerificationQuery, VerificationResult};

const REFERENCE_TAG: u64 = 0x5245_4633;

/// Seed of the null reference used for a query released with `seed`.
pub fn reference_seed(seed: u64) -> u64 {
    derive_seed(seed, &[REFERENCE_TAG])
}

type ReferenceKey = (usize, u64, u64, usize, u64);

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub ledger: BudgetLedger,
    next_query: AtomicU64,
}

#[derive(Debug, Default)]
pub struct VerificationService {
    datasets: RwLock<HashMap<String, Arc<Table>>>,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    references: Mutex<HashMap<ReferenceKey, Arc<ReferenceDistribution>>>,
    ledger_dir: Option<PathBuf>,
    next_session: AtomicU64,
}

impl VerificationService {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sessions opened later append their ledgers to
    /// `<dir>/<session id>.jsonl`.
    pub fn with_ledger_dir(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            ledger_dir: Some(dir),
            ..Self::default()
        })
    }

    /// Parses and stores a CSV upload. Re-uploading identical bytes returns
    /// the same id.
    pub fn add_dataset(&self, csv: &[u8]) -> Result<String> {
        let table = Table::parse(csv)?;
        let id = table.id.clone();
        self.datasets
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .entry(id.clone())
            .or_insert_with(|| Arc::new(table));
        Ok(id)
    }

    pub fn dataset(&self, id: &str) -> Result<Arc<Table>> {
        self.datasets
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownDataset(id.to_string()))
    }

    pub fn open_session(&self, dataset_id: &str, epsilon_total: f64) -> Result<String> {
        self.dataset(dataset_id)?;
        let n = self.next_session.fetch_add(1, Ordering::Relaxed);
        let id = format!("s{n}-{:08x}", entropy_seed() as u32);
        let mut ledger = BudgetLedger::new(dataset_id, epsilon_total)?;
        if let Some(dir) = &self.ledger_dir {
            ledger = ledger.with_log(dir.join(format!("{id}.jsonl")))?;
        }
        let session = Arc::new(Session {
            id: id.clone(),
            ledger,
            next_query: AtomicU64::new(0),
        });
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id.clone(), session);
        Ok(id)
    }

    pub fn session(&self, id: &str) -> Result<Arc<Session>> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn budget_status(&self, session_id: &str) -> Result<BudgetStatus> {
        Ok(self.session(session_id)?.ledger.status())
    }

    /// Releases, tests and charges one query. The budget is reserved before
    /// any computation and returned if anything fails, so only successful
    /// releases are charged.
    pub fn submit_query(
        &self,
        session_id: &str,
        query: &VerificationQuery,
    ) -> Result<VerificationResult> {
        let session = self.session(session_id)?;
        if query.dataset_id != session.ledger.dataset_id() {
            return Err(ServiceError::InvalidQuery(format!(
                "session is bound to dataset {}, not {}",
                session.ledger.dataset_id(),
                query.dataset_id
            )));
        }
        let reservation = session.ledger.reserve(query.epsilon)?;
        let seed = query.seed.unwrap_or_else(entropy_seed);
        let n = session.next_query.fetch_add(1, Ordering::Relaxed);
        let query_id = format!("{}-q{n}", session.id);
        let result = self.evaluate(query, seed, &query_id)?;
        reservation.commit(LedgerEntry {
            query_id,
            epsilon_spent: query.epsilon,
            timestamp: Utc::now(),
            query: query.clone(),
            seed,
            result: result.clone(),
        })?;
        Ok(result)
    }

    /// Recomputes every entry without charging anything.
    pub fn replay(&self, entries: &[LedgerEntry]) -> Result<Vec<VerificationResult>> {
        entries
            .iter()
            .map(|e| self.evaluate(&e.query, e.seed, &e.query_id))
            .collect()
    }

    /// The release and test for `query` at `seed`, with no budget
    /// accounting. A pure function of the dataset, query and seed.
    pub fn evaluate(
        &self,
        query: &VerificationQuery,
        seed: u64,
        query_id: &str,
    ) -> Result<VerificationResult> {
        let table = self.dataset(&query.dataset_id)?;
        if query.n_mc < MIN_REFERENCE_DRAWS {
            return Err(ServiceError::InvalidQuery(format!(
                "n_mc must be at least {MIN_REFERENCE_DRAWS}"
            )));
        }
        if !query.epsilon.is_finite() {
            return Err(ServiceError::InvalidQuery("epsilon must be finite".into()));
        }
        let data = table.dataset(&query.response_column, &query.predictor_columns)?;
        let j = if query.coefficient == INTERCEPT_NAME {
            0
        } else if query.predictor_columns.contains(&query.coefficient) {
            data.column_index(&query.coefficient)
                .expect("predictor column present")
        } else {
            return Err(ServiceError::InvalidQuery(format!(
                "coefficient {:?} is not among the predictors",
                query.coefficient
            )));
        };
        let params = PrivacyParams::new(query.epsilon, query.m, query.a)?;
        let released = release_statistic(&data, j, query.null_value, &params, seed)?;
        let reference = self.reference(&params, query.n_mc, reference_seed(seed))?;
        let decision = decide(&released, &reference, query.alpha)?;
        Ok(VerificationResult {
            query_id: query_id.to_string(),
            released_value: released.value,
            sign: released.sign,
            p_value: decision.p_value,
            reject: decision.reject,
            critical_value: decision.critical_value,
            epsilon_charged: query.epsilon,
            seed_used: seed,
        })
    }

    fn reference(
        &self,
        params: &PrivacyParams,
        n_mc: usize,
        seed: u64,
    ) -> Result<Arc<ReferenceDistribution>> {
        let key = (
            params.m,
            params.a.to_bits(),
            params.epsilon.to_bits(),
            n_mc,
            seed,
        );
        if let Some(found) = self
            .references
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(&key)
        {
            return Ok(found.clone());
        }
        let built = Arc::new(simulate_null_reference(params, n_mc, seed)?);
        self.references
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, built.clone());
        Ok(built)
    }
}
