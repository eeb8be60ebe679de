//! Choosing `(M, a)` from simulated losses.
//!
//! Tables are built from synthetic draws only. Nothing in this module reads a
//! confidential dataset, so choosing parameters costs no privacy budget.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power::{
    cell_seed, loss_sig, sign_accuracy_with, type_ii_estimate_with, NormalModel, StatisticSource,
    DEFAULT_A_GRID, DEFAULT_M_GRID,
};
use crate::release::PrivacyParams;

/// Smallest number of draws accepted for a loss table.
pub const MIN_TABLE_DRAWS: usize = 10_000;
/// Target sign accuracy used for the sign loss column.
pub const DEFAULT_ALPHA0: f64 = 0.95;

/// Settings for [`build_loss_table_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTableConfig {
    pub epsilon: f64,
    pub m_grid: Vec<usize>,
    pub a_grid: Vec<f64>,
    pub alpha: f64,
    pub lambda0: f64,
    pub alpha0: f64,
    pub n_mc: usize,
    pub seed: u64,
}

impl Default for LossTableConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.5,
            m_grid: DEFAULT_M_GRID.to_vec(),
            a_grid: DEFAULT_A_GRID.to_vec(),
            alpha: 0.05,
            lambda0: 0.2,
            alpha0: DEFAULT_ALPHA0,
            n_mc: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    #[serde(rename = "M")]
    pub m: usize,
    pub a: f64,
    pub loss_sig: f64,
    pub loss_sgn: f64,
    /// Simulated type-II error behind `loss_sig`.
    pub type_ii: f64,
    /// Monte Carlo standard error of `type_ii`.
    pub mc_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTable {
    pub epsilon: f64,
    pub alpha: f64,
    pub lambda0: f64,
    pub rows: Vec<LossRow>,
    pub n_mc: usize,
    pub seed: u64,
}

/// Chosen parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    #[serde(rename = "M")]
    pub m: usize,
    pub a: f64,
    pub loss_sig: f64,
}

pub fn build_loss_table(
    epsilon: f64,
    m_grid: &[usize],
    a_grid: &[f64],
    alpha: f64,
    lambda0: f64,
    n_mc: usize,
    seed: u64,
) -> Result<LossTable> {
    let config = LossTableConfig {
        epsilon,
        m_grid: m_grid.to_vec(),
        a_grid: a_grid.to_vec(),
        alpha,
        lambda0,
        alpha0: DEFAULT_ALPHA0,
        n_mc,
        seed,
    };
    build_loss_table_with(&NormalModel::default(), &config)
}

/// Builds the table from any statistic generator, for example a
/// [`DesignSimulation`](crate::power::DesignSimulation) on auxiliary data.
/// Cells are computed in parallel; cell `(M, a)` uses
/// [`cell_seed`]`(seed, M, a)`.
pub fn build_loss_table_with<S: StatisticSource + ?Sized>(
    source: &S,
    config: &LossTableConfig,
) -> Result<LossTable> {
    if config.m_grid.is_empty() || config.a_grid.is_empty() {
        return Err(Error::InvalidArgument(
            "loss table grids must be nonempty".into(),
        ));
    }
    if config.n_mc < MIN_TABLE_DRAWS {
        return Err(Error::TooFewDraws {
            n_mc: config.n_mc,
            min: MIN_TABLE_DRAWS,
        });
    }
    let cells: Vec<(usize, f64)> = config
        .m_grid
        .iter()
        .flat_map(|&m| config.a_grid.iter().map(move |&a| (m, a)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(m, a)| {
            let params = PrivacyParams::new(config.epsilon, m, a)?;
            let seed = cell_seed(config.seed, m, a);
            let type_ii = type_ii_estimate_with(
                source,
                &params,
                config.alpha,
                config.lambda0,
                config.n_mc,
                seed,
            )?;
            let accuracy = sign_accuracy_with(source, &params, config.alpha0, config.n_mc, seed)?;
            Ok(LossRow {
                m,
                a,
                loss_sig: loss_sig(type_ii.value, config.lambda0),
                loss_sgn: (config.alpha0 - accuracy.value).max(0.0),
                type_ii: type_ii.value,
                mc_stderr: type_ii.stderr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LossTable {
        epsilon: config.epsilon,
        alpha: config.alpha,
        lambda0: config.lambda0,
        rows,
        n_mc: config.n_mc,
        seed: config.seed,
    })
}

/// Smallest `M` with some row under `bound`; at that `M`, the `a` with the
/// smallest `loss_sig`. Rows within one standard error of the minimum count
/// as tied, and ties go to the largest `a`, which truncates least.
pub fn select_params(table: &LossTable, bound: f64) -> Result<Selection> {
    if !(bound > 0.0 && bound < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "bound must lie in (0, 1), got {bound}"
        )));
    }
    let feasible: Vec<&LossRow> = table.rows.iter().filter(|r| r.loss_sig < bound).collect();
    let m = feasible
        .iter()
        .map(|r| r.m)
        .min()
        .ok_or(Error::NoFeasible { bound })?;
    let at_m: Vec<&LossRow> = feasible.into_iter().filter(|r| r.m == m).collect();
    let best = at_m
        .iter()
        .map(|r| r.loss_sig)
        .fold(f64::INFINITY, f64::min);
    let tolerance = at_m
        .iter()
        .filter(|r| r.loss_sig == best)
        .map(|r| r.mc_stderr)
        .fold(0.0, f64::max);
    let chosen = at_m
        .iter()
        .filter(|r| r.loss_sig <= best + tolerance)
        .max_by(|x, y| x.a.total_cmp(&y.a))
        .expect("at least one row attains the minimum");
    Ok(Selection {
        m,
        a: chosen.a,
        loss_sig: chosen.loss_sig,
    })
}

impl LossTable {
    /// Table with the given `loss_sig` values and zero standard errors.
    /// `values[i][k]` belongs to `a_grid[i]` and `m_grid[k]`.
    pub fn from_values(
        epsilon: f64,
        alpha: f64,
        lambda0: f64,
        m_grid: &[usize],
        a_grid: &[f64],
        values: &[Vec<f64>],
    ) -> Result<Self> {
        if values.len() != a_grid.len() || values.iter().any(|row| row.len() != m_grid.len()) {
            return Err(Error::InvalidArgument(
                "value grid does not match the axes".into(),
            ));
        }
        let rows = a_grid
            .iter()
            .zip(values)
            .flat_map(|(&a, row)| {
                m_grid.iter().zip(row).map(move |(&m, &loss)| LossRow {
                    m,
                    a,
                    loss_sig: loss,
                    loss_sgn: f64::NAN,
                    type_ii: loss + lambda0,
                    mc_stderr: 0.0,
                })
            })
            .collect();
        Ok(Self {
            epsilon,
            alpha,
            lambda0,
            rows,
            n_mc: 0,
            seed: 0,
        })
    }

    pub fn get(&self, m: usize, a: f64) -> Option<&LossRow> {
        self.rows.iter().find(|r| r.m == m && r.a == a)
    }

    fn axes(&self) -> (Vec<usize>, Vec<f64>) {
        let mut ms: Vec<usize> = self.rows.iter().map(|r| r.m).collect();
        ms.sort_unstable();
        ms.dedup();
        let mut as_: Vec<f64> = self.rows.iter().map(|r| r.a).collect();
        as_.sort_by(f64::total_cmp);
        as_.dedup();
        (ms, as_)
    }

    /// One CSV row per cell: `M,a,loss_sig,loss_sgn,type_ii,mc_stderr`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `loss_sig` laid out with `a` down the rows and `M` across the columns.
    /// Entries under `bound` carry a trailing `*`.
    pub fn render_text(&self, bound: Option<f64>) -> String {
        let (ms, as_) = self.axes();
        let mut out = String::new();
        let _ = write!(out, "{:>5} |", "a\\M");
        for m in &ms {
            let _ = write!(out, "{m:>8}");
        }
        out.push('\n');
        out.push_str(&"-".repeat(7 + 8 * ms.len()));
        out.push('\n');
        for &a in &as_ {
            let _ = write!(out, "{a:>5} |");
            for &m in &ms {
                match self.get(m, a) {
                    Some(row) => {
                        let mark = match bound {
                            Some(b) if row.loss_sig < b => "*",
                            _ => " ",
                        };
                        let _ = write!(out, "{:>7.2}{mark}", row.loss_sig);
                    }
                    None => {
                        let _ = write!(out, "{:>8}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_table() -> LossTable {
        LossTable::from_values(
            1.5,
            0.05,
            0.2,
            &[10, 25],
            &[1.0, 2.0, 3.0],
            &[vec![0.2, 0.05], vec![0.3, 0.05], vec![0.4, 0.2]],
        )
        .unwrap()
    }

    #[test]
    fn smallest_m_then_largest_tied_a() {
        let s = select_params(&small_table(), 0.1).unwrap();
        assert_eq!((s.m, s.a), (25, 2.0));
    }

    #[test]
    fn infeasible_bound() {
        assert_eq!(
            select_params(&small_table(), 0.01),
            Err(Error::NoFeasible { bound: 0.01 })
        );
        assert!(select_params(&small_table(), 0.0).is_err());
    }

    #[test]
    fn stderr_widens_ties() {
        let mut t = small_table();
        for row in &mut t.rows {
            if row.m == 25 && row.a == 2.0 {
                row.loss_sig = 0.04;
                row.mc_stderr = 0.02;
            }
            if row.m == 25 && row.a == 3.0 {
                row.loss_sig = 0.055;
            }
        }
        let s = select_params(&t, 0.1).unwrap();
        assert_eq!((s.m, s.a), (25, 3.0));
    }

    #[test]
    fn order_invariant() {
        let t = small_table();
        let mut reversed = t.clone();
        reversed.rows.reverse();
        assert_eq!(select_params(&t, 0.25), select_params(&reversed, 0.25));
    }

    #[test]
    fn text_layout_marks_entries() {
        let text = small_table().render_text(Some(0.1));
        assert!(text.contains("0.05*"));
        assert!(text.lines().count() == 5);
    }

    #[test]
    fn rejects_small_draw_counts() {
        let err = build_loss_table(1.5, &[10], &[1.0], 0.05, 0.2, 5_000, 0).unwrap_err();
        assert!(matches!(err, Error::TooFewDraws { .. }));
    }
}
