//! Power, sign accuracy and agreement of the private test with the
//! non-private t-test.
//!
//! Simulations draw the full-data t-statistic `T` and the noiseless truncated
//! aggregate from a [`StatisticSource`]. The default [`NormalModel`] works
//! directly with the normal sampling distributions of the statistics;
//! [`DesignSimulation`] instead simulates regressions on a supplied design
//! matrix.
//!
//! All internal seeds are derived from the caller's seed without reference to
//! ε, so evaluations at different ε share their underlying uniforms. This
//! keeps comparisons across ε free of independent Monte Carlo noise.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{laplace_interval_probability, normal_cdf, normal_quantile};
use crate::draws::{add_scaled, normal_draws, standard_laplace_draws, truncated_mean_draws};
use crate::error::{Error, Result};
use crate::reference::{
    critical_value, reference_seeds, simulate_null_reference, ReferenceDistribution,
    MIN_REFERENCE_DRAWS,
};
use crate::regression::{fit_ols, t_statistic, Dataset};
use crate::release::{aggregate_truncated, make_partition, PrivacyParams, Sign};
use crate::rng::{chunk_rng, derive_seed};

/// Default draws for power, sign and matching simulations.
pub const DEFAULT_POWER_DRAWS: usize = 100_000;
/// Default draws for asymptotic type-II grids.
pub const DEFAULT_ASYMPTOTIC_DRAWS: usize = 10_000;

pub const DEFAULT_M_GRID: [usize; 5] = [10, 25, 50, 75, 100];
pub const DEFAULT_A_GRID: [f64; 10] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
pub const DEFAULT_EPSILON_GRID: [f64; 4] = [0.5, 1.0, 2.5, 5.0];

/// Effect sizes 0, 0.1, …, 1, 2, …, 10.
pub fn default_effect_grid() -> Vec<f64> {
    (0..=10)
        .map(|i| f64::from(i) / 10.0)
        .chain((2..=10).map(f64::from))
        .collect()
}

const NULL_TAG: u64 = 1;
const ALT_TAG: u64 = 2;
const ALT_NOISE_TAG: u64 = 3;
const FULL_TAG: u64 = 4;
const ASYMPTOTIC_TAG: u64 = 5;

/// Per-cell seed used by grid evaluations.
pub fn cell_seed(seed: u64, m: usize, a: f64) -> u64 {
    derive_seed(seed, &[m as u64, a.to_bits()])
}

/// A proportion estimated from `n` Bernoulli draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MonteCarloEstimate {
    pub fn from_count(hits: usize, n: usize) -> Self {
        let value = hits as f64 / n as f64;
        Self {
            value,
            stderr: (value * (1.0 - value) / n as f64).sqrt(),
            n,
        }
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "{name} must lie in (0, 1), got {v}"
        )));
    }
    Ok(())
}

fn check_draws(n_mc: usize) -> Result<()> {
    if n_mc < MIN_REFERENCE_DRAWS {
        return Err(Error::TooFewDraws {
            n_mc,
            min: MIN_REFERENCE_DRAWS,
        });
    }
    Ok(())
}

/// Effect size, in standard deviations, at which the two-sided level-α
/// t-test has type-II error `lambda0`.
///
/// The acceptance probability `P(|N(q, 1)| < z_{1−α/2})` is at most `1 − α`
/// (at `q = 0`), so any `lambda0 ≥ 1 − α` returns 0.
pub fn q0_for(alpha: f64, lambda0: f64) -> Result<f64> {
    check_unit("alpha", alpha)?;
    check_unit("lambda0", lambda0)?;
    let z = normal_quantile(1.0 - alpha / 2.0);
    let accept = |q: f64| normal_cdf(z - q) - normal_cdf(-z - q);
    if accept(0.0) <= lambda0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while accept(hi) > lambda0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if accept(mid) > lambda0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Effect size at which `sign(T)` is correct with probability `alpha0`.
pub fn sign_effect_for(alpha0: f64) -> Result<f64> {
    if !(alpha0 > 0.5 && alpha0 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha0 must lie in (0.5, 1), got {alpha0}"
        )));
    }
    Ok(normal_quantile(alpha0))
}

/// How the per-subset t-statistic location depends on the effect size
/// `μ_T` of the full-data statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionLocation {
    /// `Z_l ~ N(√M·μ_T, 1)`.
    #[default]
    SqrtMTimesEffect,
    /// `Z_l ~ N(μ_T/√M, 1)`, the location implied by fitting each subset on
    /// `n/M` rows.
    EffectOverSqrtM,
}

impl PartitionLocation {
    pub fn location(self, mu_t: f64, m: usize) -> f64 {
        let root = (m as f64).sqrt();
        match self {
            PartitionLocation::SqrtMTimesEffect => root * mu_t,
            PartitionLocation::EffectOverSqrtM => mu_t / root,
        }
    }
}

/// One joint draw of the full-data t-statistic and the noiseless truncated
/// aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticDraw {
    pub t_full: f64,
    pub t_bar: f64,
    pub mu_t: f64,
}

/// Generator of statistics under an alternative with effect size `μ_T`.
pub trait StatisticSource: Sync {
    /// Noiseless truncated aggregates `√M · mean(clamp(T_l, −a, a))`.
    fn truncated_draws(&self, mu_t: f64, m: usize, a: f64, n: usize, seed: u64)
        -> Result<Vec<f64>>;

    /// Joint draws. The `t_bar` components equal `truncated_draws` for the
    /// same arguments.
    fn joint_draws(
        &self,
        mu_t: f64,
        m: usize,
        a: f64,
        n: usize,
        seed: u64,
    ) -> Result<Vec<StatisticDraw>>;
}

/// Statistics drawn from their normal sampling distributions:
/// `T ~ N(μ_T, 1)` and, independently, `Z_l` i.i.d. normal with unit variance
/// and location given by [`PartitionLocation`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormalModel {
    pub location: PartitionLocation,
}

impl NormalModel {
    pub fn new(location: PartitionLocation) -> Self {
        Self { location }
    }
}

impl StatisticSource for NormalModel {
    fn truncated_draws(
        &self,
        mu_t: f64,
        m: usize,
        a: f64,
        n: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        Ok(truncated_mean_draws(
            m,
            a,
            self.location.location(mu_t, m),
            n,
            seed,
        ))
    }

    fn joint_draws(
        &self,
        mu_t: f64,
        m: usize,
        a: f64,
        n: usize,
        seed: u64,
    ) -> Result<Vec<StatisticDraw>> {
        let t_bar = self.truncated_draws(mu_t, m, a, n, seed)?;
        let t_full = normal_draws(mu_t, n, derive_seed(seed, &[FULL_TAG]));
        Ok(t_full
            .into_iter()
            .zip(t_bar)
            .map(|(t_full, t_bar)| StatisticDraw {
                t_full,
                t_bar,
                mu_t,
            })
            .collect())
    }
}

/// Regressions simulated on a fixed design matrix.
///
/// Every coefficient is set `μ_T` standard errors from zero,
/// `β_k = μ_T·σ·√((XᵀX)⁻¹_kk)`, responses are drawn as `Xβ + σ·e` with
/// standard normal errors, and the statistics come from actual fits on the
/// full data and on a random partition. Intended for auxiliary or synthetic
/// designs only.
#[derive(Debug, Clone)]
pub struct DesignSimulation {
    design: DMatrix<f64>,
    names: Vec<String>,
    coefficient: usize,
    sigma: f64,
    std_errors: Vec<f64>,
}

impl DesignSimulation {
    pub fn new(design: DMatrix<f64>, coefficient: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        let names: Vec<String> = (0..design.ncols()).map(|k| format!("x{k}")).collect();
        let probe = Dataset::new(vec![0.0; design.nrows()], design.clone(), names.clone())?;
        if coefficient > probe.p() {
            return Err(Error::IndexOutOfRange {
                index: coefficient,
                columns: probe.p() + 1,
            });
        }
        let fit = fit_ols(&probe)?;
        let std_errors = (0..design.ncols())
            .map(|k| sigma * fit.cov_scaled[(k, k)].sqrt())
            .collect();
        Ok(Self {
            design,
            names,
            coefficient,
            sigma,
            std_errors,
        })
    }

    fn one_draw(&self, mu_t: f64, m: usize, a: f64, seed: u64) -> Result<StatisticDraw> {
        let n = self.design.nrows();
        let beta = DVector::from_iterator(
            self.std_errors.len(),
            self.std_errors.iter().map(|se| mu_t * se),
        );
        let mean = &self.design * beta;
        let mut rng = chunk_rng(seed, 0);
        let y: Vec<f64> = mean
            .iter()
            .map(|mu| mu + self.sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let data = Dataset::new(y, self.design.clone(), self.names.clone())?;
        let t_full = t_statistic(&fit_ols(&data)?, self.coefficient, 0.0)?;
        let plan = make_partition(n, m, seed)?;
        let subset_t = plan
            .subsets()
            .iter()
            .map(|rows| {
                let fit = crate::regression::subset_fit(&data, rows)?;
                t_statistic(&fit, self.coefficient, 0.0)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StatisticDraw {
            t_full,
            t_bar: aggregate_truncated(&subset_t, a),
            mu_t,
        })
    }
}

impl StatisticSource for DesignSimulation {
    fn truncated_draws(
        &self,
        mu_t: f64,
        m: usize,
        a: f64,
        n: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        Ok(self
            .joint_draws(mu_t, m, a, n, seed)?
            .into_iter()
            .map(|d| d.t_bar)
            .collect())
    }

    fn joint_draws(
        &self,
        mu_t: f64,
        m: usize,
        a: f64,
        n: usize,
        seed: u64,
    ) -> Result<Vec<StatisticDraw>> {
        (0..n)
            .into_par_iter()
            .map(|rep| self.one_draw(mu_t, m, a, derive_seed(seed, &[rep as u64])))
            .collect()
    }
}

/// Noiseless draws paired with standard Laplace draws, evaluated at any
/// noise scale.
struct NoisyDraws {
    noiseless: Vec<f64>,
    noise: Vec<f64>,
}

impl NoisyDraws {
    fn at(&self, scale: f64) -> Vec<f64> {
        add_scaled(&self.noiseless, &self.noise, scale)
    }
}

fn null_draws(m: usize, a: f64, n: usize, seed: u64) -> (NoisyDraws, u64) {
    let null_seed = derive_seed(seed, &[NULL_TAG]);
    let (stat_seed, noise_seed) = reference_seeds(null_seed);
    let draws = NoisyDraws {
        noiseless: truncated_mean_draws(m, a, 0.0, n, stat_seed),
        noise: standard_laplace_draws(n, noise_seed),
    };
    (draws, null_seed)
}

fn null_reference_from(
    draws: &NoisyDraws,
    params: &PrivacyParams,
    null_seed: u64,
) -> Result<ReferenceDistribution> {
    ReferenceDistribution::from_samples(draws.at(params.noise_scale()), *params, null_seed)
}

fn alternative_seeds(seed: u64, mu_t: f64) -> (u64, u64) {
    (
        derive_seed(seed, &[ALT_TAG, mu_t.to_bits()]),
        derive_seed(seed, &[ALT_NOISE_TAG, mu_t.to_bits()]),
    )
}

fn alternative_draws<S: StatisticSource + ?Sized>(
    source: &S,
    mu_t: f64,
    m: usize,
    a: f64,
    n: usize,
    seed: u64,
) -> Result<NoisyDraws> {
    let (stat_seed, noise_seed) = alternative_seeds(seed, mu_t);
    Ok(NoisyDraws {
        noiseless: source.truncated_draws(mu_t, m, a, n, stat_seed)?,
        noise: standard_laplace_draws(n, noise_seed),
    })
}

/// Joint draws at effect `mu_t` under the default [`NormalModel`]. Noise is
/// not added here.
pub fn simulate_alternative(
    mu_t: f64,
    params: &PrivacyParams,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<StatisticDraw>> {
    simulate_alternative_with(&NormalModel::default(), mu_t, params, n_mc, seed)
}

pub fn simulate_alternative_with<S: StatisticSource + ?Sized>(
    source: &S,
    mu_t: f64,
    params: &PrivacyParams,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<StatisticDraw>> {
    params.validate()?;
    check_draws(n_mc)?;
    let (stat_seed, _) = alternative_seeds(seed, mu_t);
    source.joint_draws(mu_t, params.m, params.a, n_mc, stat_seed)
}

fn fraction<F: Fn(f64) -> bool + Sync>(values: &[f64], pred: F) -> MonteCarloEstimate {
    let hits = values.par_iter().filter(|&&v| pred(v)).count();
    MonteCarloEstimate::from_count(hits, values.len())
}

/// Type-II error of the private test at the effect `q0` where the non-private
/// test has type-II error `lambda0`. The critical value comes from a null
/// reference simulated with the same parameters.
pub fn type_ii_rate(
    params: &PrivacyParams,
    alpha: f64,
    lambda0: f64,
    n_mc: usize,
    seed: u64,
) -> Result<f64> {
    Ok(type_ii_estimate_with(&NormalModel::default(), params, alpha, lambda0, n_mc, seed)?.value)
}

pub fn type_ii_estimate_with<S: StatisticSource + ?Sized>(
    source: &S,
    params: &PrivacyParams,
    alpha: f64,
    lambda0: f64,
    n_mc: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    params.validate()?;
    check_draws(n_mc)?;
    let q0 = q0_for(alpha, lambda0)?;
    let (null, null_seed) = null_draws(params.m, params.a, n_mc, seed);
    let r = critical_value(&null_reference_from(&null, params, null_seed)?, alpha)?;
    let alt = alternative_draws(source, q0, params.m, params.a, n_mc, seed)?;
    Ok(fraction(&alt.at(params.noise_scale()), |v| v.abs() < r))
}

/// `max(0, λ − λ0)`.
pub fn loss_sig(type_ii: f64, lambda0: f64) -> f64 {
    (type_ii - lambda0).max(0.0)
}

/// Probability that the released statistic is strictly positive at effect
/// `Φ⁻¹(alpha0)`.
pub fn sign_accuracy_with<S: StatisticSource + ?Sized>(
    source: &S,
    params: &PrivacyParams,
    alpha0: f64,
    n_mc: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    params.validate()?;
    check_draws(n_mc)?;
    let mu0 = sign_effect_for(alpha0)?;
    let alt = alternative_draws(source, mu0, params.m, params.a, n_mc, seed)?;
    Ok(fraction(&alt.at(params.noise_scale()), |v| v > 0.0))
}

/// `max(0, α0 − s)` where `s` is the sign accuracy of the released statistic
/// at the effect where the non-private sign is right with probability `α0`.
pub fn loss_sgn(params: &PrivacyParams, alpha0: f64, n_mc: usize, seed: u64) -> Result<f64> {
    let s = sign_accuracy_with(&NormalModel::default(), params, alpha0, n_mc, seed)?;
    Ok((alpha0 - s.value).max(0.0))
}

/// Worst-case agreement between the private and non-private procedures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingProbabilities {
    pub mu_t: f64,
    pub epsilon: f64,
    /// Minimum over the grid of `P(private decision = non-private decision)`.
    pub m_sig: f64,
    /// Minimum over the grid of `P(sign(T̄) = sign(T))`.
    pub m_sgn: f64,
    /// Monte Carlo standard errors of the two minima.
    pub m_sig_stderr: f64,
    pub m_sgn_stderr: f64,
}

pub fn matching_probabilities(
    mu_t: f64,
    epsilon: f64,
    m_grid: &[usize],
    a_grid: &[f64],
    alpha: f64,
    n_mc: usize,
    seed: u64,
) -> Result<MatchingProbabilities> {
    let curves = matching_curves_with(
        &NormalModel::default(),
        &[mu_t],
        &[epsilon],
        m_grid,
        a_grid,
        alpha,
        n_mc,
        seed,
    )?;
    Ok(curves[0])
}

/// Matching probabilities for every `(μ_T, ε)` pair. Draws are generated
/// once per `(μ_T, M, a)` cell and reused for every ε.
#[allow(clippy::too_many_arguments)]
pub fn matching_curves_with<S: StatisticSource + ?Sized>(
    source: &S,
    effects: &[f64],
    epsilons: &[f64],
    m_grid: &[usize],
    a_grid: &[f64],
    alpha: f64,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<MatchingProbabilities>> {
    if effects.is_empty() || epsilons.is_empty() || m_grid.is_empty() || a_grid.is_empty() {
        return Err(Error::InvalidArgument(
            "matching grids must be nonempty".into(),
        ));
    }
    check_unit("alpha", alpha)?;
    check_draws(n_mc)?;
    for &epsilon in epsilons {
        for &m in m_grid {
            for &a in a_grid {
                PrivacyParams::new(epsilon, m, a)?;
            }
        }
    }
    let z = normal_quantile(1.0 - alpha / 2.0);

    let mut out: Vec<MatchingProbabilities> = effects
        .iter()
        .flat_map(|&mu_t| {
            epsilons.iter().map(move |&epsilon| MatchingProbabilities {
                mu_t,
                epsilon,
                m_sig: f64::INFINITY,
                m_sgn: f64::INFINITY,
                m_sig_stderr: 0.0,
                m_sgn_stderr: 0.0,
            })
        })
        .collect();

    for &m in m_grid {
        for &a in a_grid {
            let cell = cell_seed(seed, m, a);
            let (null, null_seed) = null_draws(m, a, n_mc, cell);
            let radii = epsilons
                .iter()
                .map(|&epsilon| {
                    let params = PrivacyParams::new(epsilon, m, a)?;
                    critical_value(&null_reference_from(&null, &params, null_seed)?, alpha)
                })
                .collect::<Result<Vec<_>>>()?;

            for (i, &mu_t) in effects.iter().enumerate() {
                let (stat_seed, noise_seed) = alternative_seeds(cell, mu_t);
                let joint = source.joint_draws(mu_t, m, a, n_mc, stat_seed)?;
                let noise = standard_laplace_draws(n_mc, noise_seed);
                for (k, &epsilon) in epsilons.iter().enumerate() {
                    let scale = PrivacyParams::new(epsilon, m, a)?.noise_scale();
                    let r = radii[k];
                    let (sig_hits, sgn_hits) = joint
                        .par_iter()
                        .zip(noise.par_iter())
                        .map(|(d, e)| {
                            let private = d.t_bar + scale * e;
                            let sig = (d.t_full.abs() >= z) == (private.abs() >= r);
                            let sgn = Sign::of(d.t_full) == Sign::of(private);
                            (usize::from(sig), usize::from(sgn))
                        })
                        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
                    let sig = MonteCarloEstimate::from_count(sig_hits, n_mc);
                    let sgn = MonteCarloEstimate::from_count(sgn_hits, n_mc);
                    let slot = &mut out[i * epsilons.len() + k];
                    if sig.value < slot.m_sig {
                        slot.m_sig = sig.value;
                        slot.m_sig_stderr = sig.stderr;
                    }
                    if sgn.value < slot.m_sgn {
                        slot.m_sgn = sgn.value;
                        slot.m_sgn_stderr = sgn.stderr;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Large-sample type-II error: the probability of `(−r, r)` under
/// Laplace(√M·a, 2a/(√M·ε)), with `r` from a simulated null reference.
pub fn asymptotic_type_ii(
    params: &PrivacyParams,
    alpha: f64,
    n_mc: usize,
    seed: u64,
) -> Result<f64> {
    let reference = simulate_null_reference(params, n_mc, derive_seed(seed, &[NULL_TAG]))?;
    let r = critical_value(&reference, alpha)?;
    Ok(asymptotic_type_ii_at(params, r))
}

/// Closed-form large-sample type-II error for a given critical value.
pub fn asymptotic_type_ii_at(params: &PrivacyParams, r: f64) -> f64 {
    laplace_interval_probability(-r, r, params.saturation(), params.noise_scale())
}

/// Monte Carlo estimate of the large-sample type-II error from `n_mc` draws
/// of Laplace(√M·a, 2a/(√M·ε)), against the same critical value as
/// [`asymptotic_type_ii`].
pub fn asymptotic_type_ii_mc(
    params: &PrivacyParams,
    alpha: f64,
    n_mc: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let reference = simulate_null_reference(params, n_mc, derive_seed(seed, &[NULL_TAG]))?;
    let r = critical_value(&reference, alpha)?;
    let noise = standard_laplace_draws(n_mc, derive_seed(seed, &[ASYMPTOTIC_TAG]));
    let location = params.saturation();
    let scale = params.noise_scale();
    let draws: Vec<f64> = noise.iter().map(|e| location + scale * e).collect();
    Ok(fraction(&draws, |v| v.abs() < r))
}

/// Closed-form upper bound on the large-sample type-II error.
///
/// With `k = ε√M/(2a)` and `r* = −ln(α)·(1/k + 1)`:
/// if `r* < √M·a` the bound is `½(α^{−1−k} − α^{1+k})·e^{−εM/2}`, otherwise
/// `1 − ½α^{1+k}(e^{εM/2} − e^{−εM/2})`. The tie `r* = √M·a` takes the
/// second (larger) branch.
pub fn type_ii_upper_bound(params: &PrivacyParams, alpha: f64) -> Result<f64> {
    params.validate()?;
    check_unit("alpha", alpha)?;
    if params.is_noiseless() {
        return Err(Error::InvalidArgument(
            "the bound needs a finite epsilon".into(),
        ));
    }
    let m = params.m as f64;
    let k = params.epsilon * m.sqrt() / (2.0 * params.a);
    let r_star = threshold_radius(params, alpha);
    let half_em = params.epsilon * m / 2.0;
    let bound = if r_star < params.saturation() {
        0.5 * (alpha.powf(-1.0 - k) - alpha.powf(1.0 + k)) * (-half_em).exp()
    } else {
        1.0 - 0.5 * alpha.powf(1.0 + k) * (half_em.exp() - (-half_em).exp())
    };
    Ok(bound)
}

/// `r* = −ln(α)·(2a/(ε√M) + 1)`, the surrogate critical value used by
/// [`type_ii_upper_bound`].
pub fn threshold_radius(params: &PrivacyParams, alpha: f64) -> f64 {
    -alpha.ln() * (params.noise_scale() + 1.0)
}

/// Exact tail probabilities used as oracles for simulated distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceTails {
    /// `P(|T̄^{t,ε} − T̄^{t,R}| > c) = exp(−cε√M/(2a))`.
    pub noise_exceedance: f64,
    /// Upper bound `1 − (Φ(a−μ) − Φ(−a−μ))^M` on the probability that any
    /// subset statistic with mean `μ` is truncated.
    pub truncation_bound: f64,
}

pub fn distance_tail_oracles(params: &PrivacyParams, c: f64, mu: f64) -> Result<DistanceTails> {
    params.validate()?;
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "c must be positive, got {c}"
        )));
    }
    let noise_exceedance = if params.is_noiseless() {
        0.0
    } else {
        (-c / params.noise_scale()).exp()
    };
    let inside = normal_cdf(params.a - mu) - normal_cdf(-params.a - mu);
    Ok(DistanceTails {
        noise_exceedance,
        truncation_bound: 1.0 - inside.powi(params.m as i32),
    })
}

/// Summary of the private test at one `(M, a, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub params: PrivacyParams,
    pub alpha: f64,
    pub lambda0: f64,
    pub alpha0: f64,
    pub q0: f64,
    /// Private-test critical value.
    pub critical_value: f64,
    /// Type-II error of the private test at `q0`.
    pub lambda: f64,
    pub loss_sig: f64,
    pub loss_sgn: f64,
    /// Agreement with the non-private test and sign at `μ_T = q0`.
    pub m_sig: f64,
    pub m_sgn: f64,
    pub asymptotic_type_ii: f64,
    pub type_ii_bound: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn power_report(
    params: &PrivacyParams,
    alpha: f64,
    lambda0: f64,
    alpha0: f64,
    n_mc: usize,
    seed: u64,
) -> Result<PowerReport> {
    let source = NormalModel::default();
    let q0 = q0_for(alpha, lambda0)?;
    let lambda = type_ii_estimate_with(&source, params, alpha, lambda0, n_mc, seed)?.value;
    let accuracy = sign_accuracy_with(&source, params, alpha0, n_mc, seed)?.value;
    let matching = matching_curves_with(
        &source,
        &[q0],
        &[params.epsilon],
        &[params.m],
        &[params.a],
        alpha,
        n_mc,
        seed,
    )?[0];
    let (null, null_seed) = null_draws(params.m, params.a, n_mc, seed);
    let r = critical_value(&null_reference_from(&null, params, null_seed)?, alpha)?;
    Ok(PowerReport {
        params: *params,
        alpha,
        lambda0,
        alpha0,
        q0,
        critical_value: r,
        lambda,
        loss_sig: loss_sig(lambda, lambda0),
        loss_sgn: (alpha0 - accuracy).max(0.0),
        m_sig: matching.m_sig,
        m_sgn: matching.m_sgn,
        asymptotic_type_ii: asymptotic_type_ii_at(params, r),
        type_ii_bound: type_ii_upper_bound(params, alpha)?,
    })
}

/// Grid of `(M, a, ε, α)` combinations to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerGrid {
    pub m_grid: Vec<usize>,
    pub a_grid: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub alphas: Vec<f64>,
    pub lambda0: f64,
    pub alpha0: f64,
    pub n_mc: usize,
    pub seed: u64,
    #[serde(default)]
    pub location: PartitionLocation,
}

impl Default for PowerGrid {
    fn default() -> Self {
        Self {
            m_grid: DEFAULT_M_GRID.to_vec(),
            a_grid: DEFAULT_A_GRID.to_vec(),
            epsilons: DEFAULT_EPSILON_GRID.to_vec(),
            alphas: vec![0.05],
            lambda0: 0.2,
            alpha0: 0.95,
            n_mc: DEFAULT_POWER_DRAWS,
            seed: 0,
            location: PartitionLocation::default(),
        }
    }
}

/// One long-format grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    #[serde(rename = "M")]
    pub m: usize,
    pub a: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub metric: String,
    pub value: f64,
    pub n_mc: usize,
    pub seed: u64,
}

pub const METRIC_TYPE_II: &str = "type_ii";
pub const METRIC_LOSS_SIG: &str = "loss_sig";
pub const METRIC_LOSS_SGN: &str = "loss_sgn";
pub const METRIC_ASYMPTOTIC: &str = "asymptotic_type_ii";
pub const METRIC_BOUND: &str = "type_ii_bound";

/// Evaluates every metric on the grid. Values at a cell equal the single-cell
/// functions called with [`cell_seed`]`(grid.seed, M, a)`.
pub fn power_grid(grid: &PowerGrid) -> Result<Vec<GridRecord>> {
    if grid.m_grid.is_empty() || grid.a_grid.is_empty() || grid.epsilons.is_empty() {
        return Err(Error::InvalidArgument(
            "power grid axes must be nonempty".into(),
        ));
    }
    check_draws(grid.n_mc)?;
    check_unit("lambda0", grid.lambda0)?;
    let mu0 = sign_effect_for(grid.alpha0)?;
    let source = NormalModel::new(grid.location);

    let cells: Vec<(usize, f64)> = grid
        .m_grid
        .iter()
        .flat_map(|&m| grid.a_grid.iter().map(move |&a| (m, a)))
        .collect();
    let per_cell = cells
        .par_iter()
        .map(|&(m, a)| -> Result<Vec<GridRecord>> {
            let seed = cell_seed(grid.seed, m, a);
            let (null, null_seed) = null_draws(m, a, grid.n_mc, seed);
            let sign_alt = alternative_draws(&source, mu0, m, a, grid.n_mc, seed)?;
            let mut records = Vec::new();
            for &alpha in &grid.alphas {
                let q0 = q0_for(alpha, grid.lambda0)?;
                let alt = alternative_draws(&source, q0, m, a, grid.n_mc, seed)?;
                for &epsilon in &grid.epsilons {
                    let params = PrivacyParams::new(epsilon, m, a)?;
                    let scale = params.noise_scale();
                    let r =
                        critical_value(&null_reference_from(&null, &params, null_seed)?, alpha)?;
                    let lambda = fraction(&alt.at(scale), |v| v.abs() < r).value;
                    let accuracy = fraction(&sign_alt.at(scale), |v| v > 0.0).value;
                    let mut push = |metric: &str, value: f64| {
                        records.push(GridRecord {
                            m,
                            a,
                            epsilon,
                            alpha,
                            metric: metric.to_string(),
                            value,
                            n_mc: grid.n_mc,
                            seed: grid.seed,
                        })
                    };
                    push(METRIC_TYPE_II, lambda);
                    push(METRIC_LOSS_SIG, loss_sig(lambda, grid.lambda0));
                    push(METRIC_LOSS_SGN, (grid.alpha0 - accuracy).max(0.0));
                    push(METRIC_ASYMPTOTIC, asymptotic_type_ii_at(&params, r));
                    if !params.is_noiseless() {
                        push(METRIC_BOUND, type_ii_upper_bound(&params, alpha)?);
                    }
                }
            }
            Ok(records)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// Writes grid records as CSV with columns
/// `M,a,epsilon,alpha,metric,value,n_mc,seed`.
pub fn write_grid_csv<W: Write>(records: &[GridRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for record in records {
        w.serialize(record)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes matching curves as CSV with columns
/// `epsilon,mu_t,metric,value,stderr,n_mc,seed`.
pub fn write_matching_csv<W: Write>(
    curves: &[MatchingProbabilities],
    n_mc: usize,
    seed: u64,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "epsilon", "mu_t", "metric", "value", "stderr", "n_mc", "seed",
    ])?;
    for c in curves {
        for (metric, value, stderr) in [
            ("m_sig", c.m_sig, c.m_sig_stderr),
            ("m_sgn", c.m_sgn, c.m_sgn_stderr),
        ] {
            w.write_record([
                c.epsilon.to_string(),
                c.mu_t.to_string(),
                metric.to_string(),
                value.to_string(),
                stderr.to_string(),
                n_mc.to_string(),
                seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn q0_matches_quantile_identity() {
        let q0 = q0_for(0.05, 0.2).unwrap();
        // z_{0.975} + z_{0.8} ignores the far tail, which shifts q0 slightly
        let rough = normal_quantile(0.975) + normal_quantile(0.8);
        assert!((q0 - rough).abs() < 1e-3);
        assert!((q0 - 2.8016).abs() < 1e-4);
        let z = normal_quantile(0.975);
        let accept = normal_cdf(z - q0) - normal_cdf(-z - q0);
        assert_relative_eq!(accept, 0.2, epsilon = 1e-10);
    }

    #[test]
    fn q0_boundary_and_monotone() {
        assert!(q0_for(0.05, 0.95 - 1e-12).unwrap() < 1e-4);
        assert_eq!(q0_for(0.05, 0.975).unwrap(), 0.0);
        let qs: Vec<f64> = [0.05, 0.1, 0.2, 0.4, 0.8]
            .iter()
            .map(|&l| q0_for(0.05, l).unwrap())
            .collect();
        assert!(qs.windows(2).all(|w| w[0] > w[1]));
        assert!(q0_for(0.0, 0.2).is_err());
    }

    #[test]
    fn sign_effect() {
        assert!((sign_effect_for(0.95).unwrap() - 1.6449).abs() < 1e-4);
        assert!(sign_effect_for(0.4).is_err());
    }

    #[test]
    fn bound_branches() {
        let p = PrivacyParams::new(1.0, 25, 2.0).unwrap();
        let r_star = threshold_radius(&p, 0.05);
        assert!((r_star - 5.392).abs() < 1e-3);
        let expected = 0.5 * (0.05f64.powf(-2.25) - 0.05f64.powf(2.25)) * (-12.5f64).exp();
        assert_relative_eq!(
            type_ii_upper_bound(&p, 0.05).unwrap(),
            expected,
            epsilon = 1e-15
        );
        assert!((expected - 1.58e-3).abs() < 1e-5);

        // tiny ε√M/a pushes r* past √M·a
        let wide = PrivacyParams::new(0.05, 4, 10.0).unwrap();
        assert!(threshold_radius(&wide, 0.05) > wide.saturation());
        let b = type_ii_upper_bound(&wide, 0.05).unwrap();
        assert!((0.0..=1.0).contains(&b));
    }

    #[test]
    fn distance_oracles() {
        let p = PrivacyParams::new(1.0, 25, 2.0).unwrap();
        let c = p.noise_scale() * 2f64.ln();
        assert_relative_eq!(
            distance_tail_oracles(&p, c, 0.0).unwrap().noise_exceedance,
            0.5
        );
        let bound = distance_tail_oracles(&p, 1.0, 0.0)
            .unwrap()
            .truncation_bound;
        let inside: f64 = normal_cdf(2.0) - normal_cdf(-2.0);
        assert_relative_eq!(bound, 1.0 - inside.powi(25), epsilon = 1e-14);
        assert!((bound - 0.688).abs() < 1e-3);
        let untruncated = PrivacyParams::new(f64::INFINITY, 25, f64::INFINITY).unwrap();
        assert_eq!(
            distance_tail_oracles(&untruncated, 1.0, 0.0)
                .unwrap()
                .truncation_bound,
            0.0
        );
    }

    #[test]
    fn asymptotic_closed_form_below_saturation() {
        let p = PrivacyParams::new(1.0, 25, 2.0).unwrap();
        let r = 3.0;
        let loc = p.saturation();
        let k = (25f64).sqrt() * 1.0 / (2.0 * 2.0);
        let expected = 0.5 * (((r - loc) * k).exp() - ((-r - loc) * k).exp());
        assert_relative_eq!(asymptotic_type_ii_at(&p, r), expected, max_relative = 1e-12);
    }

    #[test]
    fn partition_locations() {
        assert_eq!(PartitionLocation::SqrtMTimesEffect.location(1.0, 25), 5.0);
        assert_eq!(PartitionLocation::EffectOverSqrtM.location(1.0, 25), 0.2);
    }
}
