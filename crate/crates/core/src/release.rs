//! Subsample-and-aggregate release of a truncated t-statistic.
//!
//! A release randomly partitions the rows into `M` balanced subsets, fits the
//! regression on each subset, clamps each subset t-statistic to `[−a, a]`,
//! rescales the mean by `√M` and adds Laplace noise with scale `2a/(√M·ε)`,
//! the global sensitivity of the rescaled mean divided by ε. The sign of the
//! noisy value is a free by-product.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use crate::dist::sample_laplace;
use crate::error::{Error, Result};
use crate::regression::{subset_fit, t_statistic, Dataset};
use crate::rng::{release_rng, NOISE_STREAM, PARTITION_STREAM};

/// Privacy budget and tuning of one release.
///
/// `epsilon = +∞` is accepted as a noiseless test mode; `a = +∞` (no
/// truncation) is only meaningful together with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub a: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, m: usize, a: f64) -> Result<Self> {
        let params = Self { epsilon, m, a };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.m < 2 {
            return Err(Error::InvalidParams(format!(
                "M must be at least 2, got {}",
                self.m
            )));
        }
        if !(self.a > 0.0) {
            return Err(Error::InvalidParams(format!(
                "a must be positive, got {}",
                self.a
            )));
        }
        if self.a.is_infinite() && self.epsilon.is_finite() {
            return Err(Error::InvalidParams(
                "untruncated statistics have unbounded sensitivity".into(),
            ));
        }
        Ok(())
    }

    /// Global sensitivity of the rescaled truncated mean, `2a/√M`.
    pub fn sensitivity(&self) -> f64 {
        2.0 * self.a / (self.m as f64).sqrt()
    }

    /// Laplace scale `2a/(√M·ε)`; zero in noiseless mode.
    pub fn noise_scale(&self) -> f64 {
        if self.epsilon.is_infinite() {
            0.0
        } else {
            2.0 * self.a / ((self.m as f64).sqrt() * self.epsilon)
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.epsilon.is_infinite()
    }

    /// Saturation bound `√M·a` of the noiseless statistic.
    pub fn saturation(&self) -> f64 {
        (self.m as f64).sqrt() * self.a
    }

    /// Checks `floor(n/M) ≥ p + 2` for a dataset of `n` rows and `p` predictors.
    pub fn check_dataset(&self, n: usize, p: usize) -> Result<()> {
        if self.m > n {
            return Err(Error::InvalidM { m: self.m, n });
        }
        let per_subset = n / self.m;
        if per_subset < p + 2 {
            return Err(Error::PartitionTooSmall {
                per_subset,
                needed: p + 2,
            });
        }
        Ok(())
    }
}

/// Assignment of each row to one of `M` subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    pub assignment: Vec<usize>,
    pub m: usize,
    pub seed: u64,
}

impl PartitionPlan {
    /// Row indices of every subset, ascending within each subset.
    pub fn subsets(&self) -> Vec<Vec<usize>> {
        let mut subsets = vec![Vec::new(); self.m];
        for (row, &l) in self.assignment.iter().enumerate() {
            subsets[l].push(row);
        }
        subsets
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.m];
        for &l in &self.assignment {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Uniformly random balanced partition of `n` rows into `m` subsets. The
/// first `n mod m` subsets receive `⌈n/m⌉` rows, the rest `⌊n/m⌋`.
pub fn make_partition(n: usize, m: usize, seed: u64) -> Result<PartitionPlan> {
    if m < 2 || m > n {
        return Err(Error::InvalidM { m, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut release_rng(seed, PARTITION_STREAM));

    let base = n / m;
    let extra = n % m;
    let mut assignment = vec![0; n];
    let mut pos = 0;
    for l in 0..m {
        let size = base + usize::from(l < extra);
        for &row in &order[pos..pos + size] {
            assignment[row] = l;
        }
        pos += size;
    }
    Ok(PartitionPlan {
        assignment,
        m,
        seed,
    })
}

pub fn truncate(t: f64, a: f64) -> f64 {
    if t < -a {
        -a
    } else if t > a {
        a
    } else {
        t
    }
}

#[inline]
pub(crate) fn rescaled_mean(sum: f64, m: usize) -> f64 {
    (m as f64).sqrt() * (sum / m as f64)
}

/// `√M · mean(truncate(t_l, a))`.
pub fn aggregate_truncated(tstats: &[f64], a: f64) -> f64 {
    let sum: f64 = tstats.iter().map(|&t| truncate(t, a)).sum();
    rescaled_mean(sum, tstats.len())
}

/// Sign of a released value; exact zero maps to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(value: f64) -> Self {
        if value > 0.0 {
            Sign::Positive
        } else if value < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Sign::Negative),
            0 => Ok(Sign::Zero),
            1 => Ok(Sign::Positive),
            other => Err(format!("invalid sign {other}")),
        }
    }
}

/// One ε-differentially private draw of the aggregated t-statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleasedStatistic {
    pub value: f64,
    pub sign: Sign,
    pub noise_scale: f64,
    pub params: PrivacyParams,
    pub coefficient: usize,
    pub null_value: f64,
    pub seed: u64,
}

fn subset_tstats(data: &Dataset, j: usize, b: f64, plan: &PartitionPlan) -> Result<Vec<f64>> {
    plan.subsets()
        .iter()
        .enumerate()
        .map(|(l, rows)| {
            let fit = subset_fit(data, rows).map_err(|e| match e {
                Error::RankDeficient { .. } => Error::RankDeficientSubset { subset: l },
                other => other,
            })?;
            t_statistic(&fit, j, b).map_err(|e| match e {
                Error::ZeroResidualVariance => Error::ZeroResidualVarianceSubset { subset: l },
                other => other,
            })
        })
        .collect()
}

fn check_coefficient(data: &Dataset, j: usize) -> Result<()> {
    let columns = data.p() + 1;
    if j >= columns {
        return Err(Error::IndexOutOfRange { index: j, columns });
    }
    Ok(())
}

/// The noiseless rescaled truncated mean for an explicit partition.
///
/// Exposed for audits and sensitivity checks; releasing its output directly
/// is not private.
pub fn noiseless_statistic(
    data: &Dataset,
    j: usize,
    null_value: f64,
    a: f64,
    plan: &PartitionPlan,
) -> Result<f64> {
    check_coefficient(data, j)?;
    if plan.assignment.len() != data.n() {
        return Err(Error::InvalidArgument(format!(
            "partition covers {} rows, dataset has {}",
            plan.assignment.len(),
            data.n()
        )));
    }
    let tstats = subset_tstats(data, j, null_value, plan)?;
    Ok(aggregate_truncated(&tstats, a))
}

/// Releases the noisy statistic for coefficient `j` under `H0: β_j = null_value`.
///
/// If any subset regression fails, the whole release fails and nothing is
/// drawn from the noise stream.
pub fn release_statistic(
    data: &Dataset,
    j: usize,
    null_value: f64,
    params: &PrivacyParams,
    seed: u64,
) -> Result<ReleasedStatistic> {
    params.validate()?;
    check_coefficient(data, j)?;
    params.check_dataset(data.n(), data.p())?;

    let plan = make_partition(data.n(), params.m, seed)?;
    let tstats = subset_tstats(data, j, null_value, &plan)?;
    let aggregate = aggregate_truncated(&tstats, params.a);

    let noise_scale = params.noise_scale();
    let noise = if params.is_noiseless() {
        0.0
    } else {
        sample_laplace(0.0, noise_scale, &mut release_rng(seed, NOISE_STREAM))
    };
    let value = aggregate + noise;
    Ok(ReleasedStatistic {
        value,
        sign: Sign::of(value),
        noise_scale,
        params: *params,
        coefficient: j,
        null_value,
        seed,
    })
}
