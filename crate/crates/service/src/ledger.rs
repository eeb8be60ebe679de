//! Privacy budget accounting under sequential composition.
//!
//! Amounts are tracked as integer multiples of 1e−12 so that repeated
//! charges add up exactly; fifty charges of 0.1 exhaust a budget of 5.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};
use crate::query::{VerificationQuery, VerificationResult};

const UNITS_PER_EPSILON: f64 = 1e12;

/// ε in ledger units, rounded to the nearest 1e−12.
pub fn to_units(epsilon: f64) -> u64 {
    (epsilon * UNITS_PER_EPSILON).round() as u64
}

pub fn from_units(units: u64) -> f64 {
    units as f64 / UNITS_PER_EPSILON
}

/// One committed release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub query_id: String,
    pub epsilon_spent: f64,
    pub timestamp: DateTime<Utc>,
    pub query: VerificationQuery,
    pub seed: u64,
    pub result: VerificationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetStatus {
    pub dataset_id: String,
    pub epsilon_total: f64,
    pub epsilon_remaining: f64,
    pub entries: Vec<LedgerEntry>,
}

#[derive(Debug, Default)]
struct State {
    spent: u64,
    reserved: u64,
    entries: Vec<LedgerEntry>,
}

#[derive(Debug)]
pub struct BudgetLedger {
    dataset_id: String,
    total: u64,
    state: Mutex<State>,
    log: Option<Mutex<File>>,
}

impl BudgetLedger {
    pub fn new(dataset_id: impl Into<String>, epsilon_total: f64) -> Result<Self> {
        if !(epsilon_total > 0.0 && epsilon_total.is_finite()) || to_units(epsilon_total) == 0 {
            return Err(ServiceError::InvalidBudget(epsilon_total));
        }
        Ok(Self {
            dataset_id: dataset_id.into(),
            total: to_units(epsilon_total),
            state: Mutex::new(State::default()),
            log: None,
        })
    }

    /// Appends every committed entry to `path` as one JSON line.
    pub fn with_log(mut self, path: impl AsRef<Path>) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        self.log = Some(Mutex::new(file));
        Ok(self)
    }

    pub fn dataset_id(&self) -> &str {
        &self.dataset_id
    }

    pub fn epsilon_total(&self) -> f64 {
        from_units(self.total)
    }

    /// Committed spending only; outstanding reservations are not subtracted.
    pub fn epsilon_remaining(&self) -> f64 {
        from_units(self.total - self.lock().spent)
    }

    pub fn status(&self) -> BudgetStatus {
        let state = self.lock();
        BudgetStatus {
            dataset_id: self.dataset_id.clone(),
            epsilon_total: from_units(self.total),
            epsilon_remaining: from_units(self.total - state.spent),
            entries: state.entries.clone(),
        }
    }

    pub fn entries(&self) -> Vec<LedgerEntry> {
        self.lock().entries.clone()
    }

    /// Holds `epsilon` against the budget until the reservation is committed
    /// or dropped.
    pub fn reserve(&self, epsilon: f64) -> Result<Reservation<'_>> {
        let units = to_units(epsilon);
        if !(epsilon > 0.0) || units == 0 {
            return Err(ServiceError::InvalidQuery(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let mut state = self.lock();
        let available = self.total - state.spent - state.reserved;
        if units > available {
            return Err(ServiceError::BudgetExhausted {
                requested: epsilon,
                remaining: from_units(available),
            });
        }
        state.reserved += units;
        Ok(Reservation {
            ledger: self,
            units,
            open: true,
        })
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }
}

/// Budget held for one release in progress. Dropping it without
/// [`commit`](Reservation::commit) returns the budget.
#[derive(Debug)]
pub struct Reservation<'a> {
    ledger: &'a BudgetLedger,
    units: u64,
    open: bool,
}

impl Reservation<'_> {
    pub fn epsilon(&self) -> f64 {
        from_units(self.units)
    }

    /// Converts the reservation into a charge and records the entry. The log
    /// line is written before the state lock is released, so file order
    /// matches entry order.
    pub fn commit(mut self, entry: LedgerEntry) -> Result<()> {
        let ledger = self.ledger;
        let mut state = ledger.lock();
        if let Some(log) = &ledger.log {
            let mut line = serde_json::to_vec(&entry)?;
            line.push(b'\n');
            let mut file = log.lock().unwrap_or_else(|e| e.into_inner());
            // a failed write keeps the reservation open, so Drop rolls it back
            file.write_all(&line)?;
            file.flush()?;
        }
        state.reserved -= self.units;
        state.spent += self.units;
        state.entries.push(entry);
        self.open = false;
        Ok(())
    }
}

impl Drop for Reservation<'_> {
    fn drop(&mut self) {
        if self.open {
            self.ledger.lock().reserved -= self.units;
        }
    }
}

/// Reads a JSON-lines ledger file.
pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<LedgerEntry>> {
    let reader = BufReader::new(File::open(path)?);
    let mut entries = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            entries.push(serde_json::from_str(&line)?);
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_are_exact_for_decimal_budgets() {
        assert_eq!(50 * to_units(0.1), to_units(5.0));
        assert_eq!(from_units(to_units(1.5)), 1.5);
    }

    #[test]
    fn reservations_roll_back_on_drop() {
        let ledger = BudgetLedger::new("d", 1.5).unwrap();
        let first = ledger.reserve(1.0).unwrap();
        assert!(matches!(
            ledger.reserve(1.0),
            Err(ServiceError::BudgetExhausted { .. })
        ));
        drop(first);
        assert!(ledger.reserve(1.0).is_ok());
        assert_eq!(ledger.epsilon_remaining(), 1.5);
    }

    #[test]
    fn rejects_bad_budgets() {
        assert!(BudgetLedger::new("d", 0.0).is_err());
        assert!(BudgetLedger::new("d", f64::INFINITY).is_err());
        assert!(BudgetLedger::new("d", -1.0).is_err());
    }
}
