//! Ordinary least squares on a dataset or any subset of its rows.
//!
//! The solve goes through a Householder QR factorization of the design; the
//! scaled covariance `(XᵀX)⁻¹` is recovered as `R⁻¹R⁻ᵀ`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Designs whose smallest/largest singular value ratio falls below this are
/// rejected as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Residual norms below this fraction of the response norm count as a
/// perfect fit (zero residual variance).
pub const PERFECT_FIT_TOLERANCE: f64 = 1e-13;

pub const INTERCEPT_NAME: &str = "(Intercept)";

/// Response vector plus design matrix. Column 0 of the design is always the
/// intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: DVector<f64>,
    x: DMatrix<f64>,
    column_names: Vec<String>,
}

impl Dataset {
    pub fn new(y: Vec<f64>, x: DMatrix<f64>, column_names: Vec<String>) -> Result<Self> {
        let n = y.len();
        if x.nrows() != n {
            return Err(Error::InvalidDataset(format!(
                "response has {n} rows but design has {}",
                x.nrows()
            )));
        }
        if x.ncols() == 0 {
            return Err(Error::InvalidDataset("design has no columns".into()));
        }
        if column_names.len() != x.ncols() {
            return Err(Error::InvalidDataset(format!(
                "{} column names for {} design columns",
                column_names.len(),
                x.ncols()
            )));
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, column: 0 });
        }
        for col in 0..x.ncols() {
            for row in 0..n {
                if !x[(row, col)].is_finite() {
                    return Err(Error::NonFinite { row, column: col });
                }
            }
        }
        if let Some(row) = (0..n).find(|&i| x[(i, 0)] != 1.0) {
            return Err(Error::InvalidDataset(format!(
                "column 0 must be the intercept, row {row} holds {}",
                x[(row, 0)]
            )));
        }
        if n <= x.ncols() {
            return Err(Error::TooFewRows {
                rows: n,
                columns: x.ncols(),
            });
        }
        Ok(Self {
            y: DVector::from_vec(y),
            x,
            column_names,
        })
    }

    /// Builds a dataset from predictor columns, prepending the intercept.
    pub fn from_columns<S: AsRef<str>>(
        y: Vec<f64>,
        predictors: &[Vec<f64>],
        names: &[S],
    ) -> Result<Self> {
        if predictors.len() != names.len() {
            return Err(Error::InvalidDataset(format!(
                "{} predictor columns but {} names",
                predictors.len(),
                names.len()
            )));
        }
        let n = y.len();
        if let Some((k, col)) = predictors.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::InvalidDataset(format!(
                "predictor {} has {} rows, response has {n}",
                names[k].as_ref(),
                col.len()
            )));
        }
        let x = DMatrix::from_fn(n, predictors.len() + 1, |i, j| {
            if j == 0 {
                1.0
            } else {
                predictors[j - 1][i]
            }
        });
        let mut column_names = vec![INTERCEPT_NAME.to_string()];
        column_names.extend(names.iter().map(|s| s.as_ref().to_string()));
        Self::new(y, x, column_names)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of predictors, excluding the intercept.
    pub fn p(&self) -> usize {
        self.x.ncols() - 1
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Diagonal of the hat matrix `X(XᵀX)⁻¹Xᵀ`. Reported as a diagnostic for
    /// the asymptotic-normality condition on the design; nothing gates on it.
    pub fn leverages(&self) -> Result<Vec<f64>> {
        let qr = self.x.clone().qr();
        check_rank(&qr.r())?;
        let q = qr.q();
        Ok(q.row_iter().map(|row| row.norm_squared()).collect())
    }
}

/// Coefficients and scaled covariance of an OLS fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub beta_hat: Vec<f64>,
    /// Residual sum of squares over `n - p - 1`.
    pub sigma2_hat: f64,
    /// `(XᵀX)⁻¹`.
    pub cov_scaled: DMatrix<f64>,
    pub df: usize,
}

impl RegressionFit {
    /// Standard error of coefficient `j`.
    pub fn std_error(&self, j: usize) -> Result<f64> {
        self.check_index(j)?;
        Ok((self.sigma2_hat * self.cov_scaled[(j, j)]).sqrt())
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.beta_hat.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                columns: self.beta_hat.len(),
            });
        }
        Ok(())
    }
}

fn check_rank(r: &DMatrix<f64>) -> Result<()> {
    let sv = r.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(ratio >= RANK_TOLERANCE) {
        return Err(Error::RankDeficient { ratio });
    }
    Ok(())
}

fn fit_design(y: DVector<f64>, x: DMatrix<f64>) -> Result<RegressionFit> {
    let (n, k) = x.shape();
    if n <= k {
        return Err(Error::TooFewRows {
            rows: n,
            columns: k,
        });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    check_rank(&r)?;

    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let beta = r
        .solve_upper_triangular(&qty.rows(0, k).into_owned())
        .ok_or(Error::RankDeficient { ratio: 0.0 })?;

    let residuals = &y - &x * &beta;
    let df = n - k;
    // residuals at rounding level of the response are an exact fit
    let rss = if residuals.norm() <= PERFECT_FIT_TOLERANCE * y.norm() {
        0.0
    } else {
        residuals.norm_squared()
    };
    let sigma2_hat = rss / df as f64;

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::RankDeficient { ratio: 0.0 })?;
    let cov = &r_inv * r_inv.transpose();
    let cov_scaled = (&cov + cov.transpose()) * 0.5;

    Ok(RegressionFit {
        beta_hat: beta.iter().copied().collect(),
        sigma2_hat,
        cov_scaled,
        df,
    })
}

pub fn fit_ols(data: &Dataset) -> Result<RegressionFit> {
    fit_design(data.y.clone(), data.x.clone())
}

/// `(β̂_j − b) / √(σ̂² (XᵀX)⁻¹_jj)`.
pub fn t_statistic(fit: &RegressionFit, j: usize, null_value: f64) -> Result<f64> {
    fit.check_index(j)?;
    if fit.sigma2_hat <= 0.0 {
        return Err(Error::ZeroResidualVariance);
    }
    let se = fit.std_error(j)?;
    Ok((fit.beta_hat[j] - null_value) / se)
}

/// Fits the regression restricted to `rows`.
pub fn subset_fit(data: &Dataset, rows: &[usize]) -> Result<RegressionFit> {
    let n = data.n();
    let mut seen = vec![false; n];
    for &i in rows {
        if i >= n {
            return Err(Error::InvalidIndexSet(format!(
                "row {i} out of range for {n} rows"
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidIndexSet(format!("row {i} repeated")));
        }
    }
    let k = data.x.ncols();
    if rows.len() <= k {
        return Err(Error::TooFewRows {
            rows: rows.len(),
            columns: k,
        });
    }
    let y = DVector::from_fn(rows.len(), |i, _| data.y[rows[i]]);
    let x = DMatrix::from_fn(rows.len(), k, |i, j| data.x[(rows[i], j)]);
    fit_design(y, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn three_points() -> Dataset {
        Dataset::from_columns(vec![1.0, 2.0, 4.0], &[vec![1.0, 2.0, 3.0]], &["x"]).unwrap()
    }

    #[test]
    fn three_point_fit_matches_normal_equations() {
        let fit = fit_ols(&three_points()).unwrap();
        assert_relative_eq!(fit.beta_hat[0], -2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(fit.beta_hat[1], 1.5, epsilon = 1e-12);
        assert_relative_eq!(fit.sigma2_hat, 1.0 / 6.0, epsilon = 1e-12);
        assert_eq!(fit.df, 1);
        // (XᵀX)⁻¹ for x = 1,2,3 is [[7/3, -1], [-1, 1/2]].
        assert_relative_eq!(fit.cov_scaled[(0, 0)], 7.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(fit.cov_scaled[(0, 1)], -1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.cov_scaled[(1, 1)], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn three_point_slope_t_statistic() {
        let fit = fit_ols(&three_points()).unwrap();
        let t = t_statistic(&fit, 1, 0.0).unwrap();
        assert_relative_eq!(t, 1.5 / (1.0f64 / 12.0).sqrt(), epsilon = 1e-12);
        assert!((t - 5.196).abs() < 1e-3);
    }

    #[test]
    fn centered_null_gives_zero() {
        let fit = fit_ols(&three_points()).unwrap();
        assert_eq!(t_statistic(&fit, 1, fit.beta_hat[1]).unwrap(), 0.0);
    }

    #[test]
    fn perfect_fit_has_zero_variance() {
        let x = vec![0.3, -1.2, 2.5, 0.7, 1.1];
        let data = Dataset::from_columns(vec![5.0; 5], &[x], &["x"]).unwrap();
        let fit = fit_ols(&data).unwrap();
        assert_relative_eq!(fit.beta_hat[0], 5.0, epsilon = 1e-12);
        assert!(fit.beta_hat[1].abs() < 1e-12);
        assert_eq!(fit.sigma2_hat, 0.0);
        assert_eq!(t_statistic(&fit, 1, 0.0), Err(Error::ZeroResidualVariance));
    }

    #[test]
    fn duplicated_column_is_rank_deficient() {
        let x = vec![1.0, 2.0, 3.0, 5.0];
        let y = vec![1.0, 3.0, 2.0, 5.0];
        let data = Dataset::from_columns(y, &[x.clone(), x], &["a", "b"]).unwrap();
        assert!(matches!(fit_ols(&data), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn identity_subset_equals_full_fit() {
        let data = three_points();
        let full = fit_ols(&data).unwrap();
        let sub = subset_fit(&data, &[0, 1, 2]).unwrap();
        for (a, b) in full.beta_hat.iter().zip(&sub.beta_hat) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
        assert_relative_eq!(full.sigma2_hat, sub.sigma2_hat, epsilon = 1e-14);
    }

    #[test]
    fn subset_errors() {
        let data = Dataset::from_columns(
            vec![1.0, 2.0, 4.0, 3.0, 7.0],
            &[vec![1.0, 2.0, 3.0, 4.0, 5.0]],
            &["x"],
        )
        .unwrap();
        assert!(matches!(
            subset_fit(&data, &[0, 1]),
            Err(Error::TooFewRows {
                rows: 2,
                columns: 2
            })
        ));
        assert!(matches!(
            subset_fit(&data, &[0, 1, 1]),
            Err(Error::InvalidIndexSet(_))
        ));
        assert!(matches!(
            subset_fit(&data, &[0, 1, 9]),
            Err(Error::InvalidIndexSet(_))
        ));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            Dataset::from_columns(vec![1.0, f64::NAN, 3.0], &[vec![1.0, 2.0, 3.0]], &["x"]),
            Err(Error::NonFinite { row: 1, column: 0 })
        ));
        assert!(matches!(
            Dataset::from_columns(
                vec![1.0, 2.0, 3.0],
                &[vec![1.0, f64::INFINITY, 3.0]],
                &["x"]
            ),
            Err(Error::NonFinite { row: 1, column: 1 })
        ));
        assert!(matches!(
            Dataset::from_columns(vec![1.0, 2.0], &[vec![1.0, 2.0]], &["x"]),
            Err(Error::TooFewRows { .. })
        ));
        let no_intercept = DMatrix::from_row_slice(3, 2, &[2.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        assert!(matches!(
            Dataset::new(
                vec![1.0, 2.0, 3.0],
                no_intercept,
                vec!["a".into(), "b".into()]
            ),
            Err(Error::InvalidDataset(_))
        ));
    }

    #[test]
    fn index_out_of_range() {
        let fit = fit_ols(&three_points()).unwrap();
        assert!(matches!(
            t_statistic(&fit, 2, 0.0),
            Err(Error::IndexOutOfRange {
                index: 2,
                columns: 2
            })
        ));
    }

    #[test]
    fn leverages_sum_to_rank() {
        let data = Dataset::from_columns(
            vec![1.0, 2.0, 4.0, 3.0, 7.0],
            &[vec![1.0, 2.0, 3.0, 4.0, 5.0]],
            &["x"],
        )
        .unwrap();
        let h = data.leverages().unwrap();
        assert_relative_eq!(h.iter().sum::<f64>(), 2.0, epsilon = 1e-12);
    }
}
