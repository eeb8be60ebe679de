//! CSV ingestion into named numeric columns.
//!
//! Comma separated, UTF-8, with a header row and '.' as the decimal point.
//! Categorical variables must be expanded into indicator columns beforehand.

use std::path::Path;

use dpsig_core::Dataset;
use sha2::{Digest, Sha256};

use crate::error::{Result, ServiceError};

/// Content hash of a CSV file, hex encoded.
pub fn dataset_id(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parsed CSV: column names and column-major values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub id: String,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(bytes);
        let names: Vec<String> = reader
            .headers()
            .map_err(|e| parse_error(0, "", e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if names.is_empty() || names.iter().all(String::is_empty) {
            return Err(parse_error(0, "", "missing header row".into()));
        }
        let mut columns = vec![Vec::new(); names.len()];
        for (i, record) in reader.records().enumerate() {
            // data rows are numbered from 1, after the header
            let row = i + 1;
            let record = record.map_err(|e| parse_error(row, "", e.to_string()))?;
            for (k, cell) in record.iter().enumerate() {
                let value: f64 = cell
                    .parse()
                    .map_err(|_| parse_error(row, &names[k], format!("not a number: {cell:?}")))?;
                if !value.is_finite() {
                    return Err(ServiceError::NonFiniteValue {
                        row,
                        column: names[k].clone(),
                    });
                }
                columns[k].push(value);
            }
        }
        Ok(Self {
            id: dataset_id(bytes),
            names,
            columns,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read(path)?)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.columns[k].as_slice())
            .ok_or_else(|| ServiceError::MissingColumn(name.to_string()))
    }

    /// Regression dataset with an intercept prepended to the predictors.
    pub fn dataset<S: AsRef<str>>(&self, response: &str, predictors: &[S]) -> Result<Dataset> {
        let y = self.column(response)?.to_vec();
        let xs = predictors
            .iter()
            .map(|p| self.column(p.as_ref()).map(<[f64]>::to_vec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset::from_columns(y, &xs, predictors)?)
    }
}

fn parse_error(row: usize, column: &str, message: String) -> ServiceError {
    ServiceError::Parse {
        row,
        column: column.to_string(),
        message,
    }
}

/// Reads a CSV file and builds the regression dataset and its content id.
pub fn ingest_csv<S: AsRef<str>>(
    path: impl AsRef<Path>,
    response: &str,
    predictors: &[S],
) -> Result<(Dataset, String)> {
    let table = Table::read(path)?;
    let data = table.dataset(response, predictors)?;
    Ok((data, table.id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_rows() {
        let table = Table::parse(b"x,y\n1,1\n2,2\n3,4\n").unwrap();
        let data = table.dataset("y", &["x"]).unwrap();
        assert_eq!(data.n(), 3);
        assert_eq!(data.y().as_slice(), &[1.0, 2.0, 4.0]);
        assert_eq!(data.column_names()[1], "x");
        assert_eq!(table.id, Table::parse(b"x,y\n1,1\n2,2\n3,4\n").unwrap().id);
        assert_ne!(table.id, Table::parse(b"x,y\n1,1\n2,2\n3,5\n").unwrap().id);
    }

    #[test]
    fn reports_coordinates() {
        match Table::parse(b"x,y\n1,1\n2,NaN\n") {
            Err(ServiceError::NonFiniteValue { row, column }) => {
                assert_eq!((row, column.as_str()), (2, "y"));
            }
            other => panic!("{other:?}"),
        }
        match Table::parse(b"x,y\n1,1\nabc,2\n") {
            Err(ServiceError::Parse { row, column, .. }) => {
                assert_eq!((row, column.as_str()), (2, "x"))
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Table::parse(b"x,y\n1,1\n2\n"),
            Err(ServiceError::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn missing_column() {
        let table = Table::parse(b"x,y\n1,1\n2,2\n3,4\n").unwrap();
        assert!(
            matches!(table.dataset("z", &["x"]), Err(ServiceError::MissingColumn(c)) if c == "z")
        );
    }
}
