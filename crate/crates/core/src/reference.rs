//! Monte Carlo null distribution of the released statistic, and the p-values,
//! critical values and decisions derived from it.
//!
//! Under `H0` each subset t-statistic is treated as a standard normal draw, so
//! the reference never touches the confidential data: this module only
//! consumes released values.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::draws::{add_scaled, standard_laplace_draws, truncated_mean_draws};
use crate::error::{Error, Result};
use crate::release::{PrivacyParams, ReleasedStatistic};
use crate::rng::derive_seed;

/// Smallest reference size accepted.
pub const MIN_REFERENCE_DRAWS: usize = 1000;
/// Default reference size.
pub const DEFAULT_REFERENCE_DRAWS: usize = 100_000;
/// `critical_value` requires at least this many draws beyond the quantile.
pub const MIN_TAIL_DRAWS: f64 = 10.0;

const STATISTIC_TAG: u64 = 0x5354_4154;
const NOISE_TAG: u64 = 0x4e4f_4953;

/// Sorted Monte Carlo draws of the released statistic under `H0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDistribution {
    samples: Vec<f64>,
    abs_sorted: Vec<f64>,
    pub params: PrivacyParams,
    pub n_mc: usize,
    pub seed: u64,
}

/// Seeds of the noiseless part and of the noise part of a reference with the
/// given seed. Power simulations reuse them to share draws across ε.
pub(crate) fn reference_seeds(seed: u64) -> (u64, u64) {
    (
        derive_seed(seed, &[STATISTIC_TAG]),
        derive_seed(seed, &[NOISE_TAG]),
    )
}

impl ReferenceDistribution {
    pub fn from_samples(mut samples: Vec<f64>, params: PrivacyParams, seed: u64) -> Result<Self> {
        params.validate()?;
        if samples.is_empty() {
            return Err(Error::TooFewDraws { n_mc: 0, min: 1 });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "reference draws must be finite".into(),
            ));
        }
        samples.sort_by(f64::total_cmp);
        let mut abs_sorted: Vec<f64> = samples.iter().map(|v| v.abs()).collect();
        abs_sorted.sort_by(f64::total_cmp);
        Ok(Self {
            n_mc: samples.len(),
            samples,
            abs_sorted,
            params,
            seed,
        })
    }

    /// Draws in ascending order.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Absolute draws in ascending order.
    pub fn abs_samples(&self) -> &[f64] {
        &self.abs_sorted
    }

    /// Writes the draws as CSV with a single `value` column.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["value"])?;
        for v in &self.samples {
            w.write_record([format!("{v:?}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, params: PrivacyParams, seed: u64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut samples = Vec::new();
        for record in r.records() {
            let record = record?;
            let field = record.get(0).unwrap_or_default();
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Cache(format!("bad reference value {field:?}")))?;
            samples.push(v);
        }
        Self::from_samples(samples, params, seed)
    }

    /// Little-endian binary layout: magic, M, a, ε, n_mc, seed, then the sorted
    /// draws.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(48 + 8 * self.n_mc);
        out.extend_from_slice(BINARY_MAGIC);
        out.extend_from_slice(&(self.params.m as u64).to_le_bytes());
        out.extend_from_slice(&self.params.a.to_le_bytes());
        out.extend_from_slice(&self.params.epsilon.to_le_bytes());
        out.extend_from_slice(&(self.n_mc as u64).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for v in &self.samples {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = BINARY_MAGIC.len() + 40;
        if bytes.len() < header || &bytes[..BINARY_MAGIC.len()] != BINARY_MAGIC {
            return Err(Error::Cache("not a reference distribution file".into()));
        }
        let word = |i: usize| {
            let start = BINARY_MAGIC.len() + 8 * i;
            <[u8; 8]>::try_from(&bytes[start..start + 8]).expect("8 bytes")
        };
        let m = u64::from_le_bytes(word(0)) as usize;
        let a = f64::from_le_bytes(word(1));
        let epsilon = f64::from_le_bytes(word(2));
        let n_mc = u64::from_le_bytes(word(3)) as usize;
        let seed = u64::from_le_bytes(word(4));
        if bytes.len() != header + 8 * n_mc {
            return Err(Error::Cache(format!(
                "expected {n_mc} draws, file holds {} bytes of data",
                bytes.len() - header
            )));
        }
        let samples = bytes[header..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::from_samples(samples, PrivacyParams { epsilon, m, a }, seed)
    }
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

const BINARY_MAGIC: &[u8; 8] = b"DPSREF01";

/// Simulates the `H0` distribution: `√M · mean(clamp(Z_l, −a, a))` with
/// `Z_l ~ N(0, 1)`, plus Laplace(0, 2a/(√M·ε)) noise.
pub fn simulate_null_reference(
    params: &PrivacyParams,
    n_mc: usize,
    seed: u64,
) -> Result<ReferenceDistribution> {
    params.validate()?;
    if n_mc < MIN_REFERENCE_DRAWS {
        return Err(Error::TooFewDraws {
            n_mc,
            min: MIN_REFERENCE_DRAWS,
        });
    }
    let (stat_seed, noise_seed) = reference_seeds(seed);
    let noiseless = truncated_mean_draws(params.m, params.a, 0.0, n_mc, stat_seed);
    let samples = if params.is_noiseless() {
        noiseless
    } else {
        let noise = standard_laplace_draws(n_mc, noise_seed);
        add_scaled(&noiseless, &noise, params.noise_scale())
    };
    ReferenceDistribution::from_samples(samples, *params, seed)
}

/// `(1 + #{i : |s_i| ≥ |observed|}) / (n_mc + 1)`.
pub fn p_value(observed: f64, reference: &ReferenceDistribution) -> f64 {
    let target = observed.abs();
    let below = reference.abs_sorted.partition_point(|&s| s < target);
    let at_or_above = reference.n_mc - below;
    (1 + at_or_above) as f64 / (reference.n_mc + 1) as f64
}

/// Smallest `|s|` value `v` with at least `(1 − α)·n_mc` draws satisfying
/// `|s| ≤ v`.
pub fn critical_value(reference: &ReferenceDistribution, alpha: f64) -> Result<f64> {
    let n = reference.n_mc;
    if !(alpha > 0.0 && alpha < 1.0) || (n as f64) * alpha < MIN_TAIL_DRAWS {
        return Err(Error::AlphaOutOfRange { alpha, n_mc: n });
    }
    // tolerance absorbs the rounding in products such as 0.95 · 100000
    let k = (((1.0 - alpha) * n as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(reference.abs_sorted[k.min(n) - 1])
}

/// Outcome of the private significance test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestDecision {
    pub reject: bool,
    pub p_value: f64,
    pub critical_value: f64,
    pub alpha: f64,
}

pub fn decide(
    released: &ReleasedStatistic,
    reference: &ReferenceDistribution,
    alpha: f64,
) -> Result<TestDecision> {
    if released.params != reference.params {
        return Err(Error::ParamsMismatch);
    }
    decide_value(released.value, reference, alpha)
}

/// Test decision for a bare released value.
pub fn decide_value(
    value: f64,
    reference: &ReferenceDistribution,
    alpha: f64,
) -> Result<TestDecision> {
    let r = critical_value(reference, alpha)?;
    Ok(TestDecision {
        reject: value.abs() >= r,
        p_value: p_value(value, reference),
        critical_value: r,
        alpha,
    })
}

/// On-disk cache of reference distributions keyed by `(M, a, ε, n_mc, seed)`.
#[derive(Debug, Clone)]
pub struct ReferenceCache {
    dir: PathBuf,
}

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn path_for(&self, params: &PrivacyParams, n_mc: usize, seed: u64) -> PathBuf {
        self.dir.join(format!(
            "ref_M{}_a{:016x}_eps{:016x}_n{}_s{}.bin",
            params.m,
            params.a.to_bits(),
            params.epsilon.to_bits(),
            n_mc,
            seed
        ))
    }

    pub fn get_or_build(
        &self,
        params: &PrivacyParams,
        n_mc: usize,
        seed: u64,
    ) -> Result<ReferenceDistribution> {
        let path = self.path_for(params, n_mc, seed);
        if let Some(found) = self.load(&path)? {
            if found.params == *params && found.n_mc == n_mc && found.seed == seed {
                return Ok(found);
            }
        }
        let built = simulate_null_reference(params, n_mc, seed)?;
        // unique temporary name so concurrent builders never share a partial file
        let unique = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
        let tmp = path.with_extension(format!("tmp{}-{unique}", std::process::id()));
        fs::write(&tmp, built.to_bytes())?;
        fs::rename(&tmp, &path)?;
        Ok(built)
    }

    fn load(&self, path: &Path) -> Result<Option<ReferenceDistribution>> {
        match fs::read(path) {
            Ok(bytes) => Ok(ReferenceDistribution::from_bytes(&bytes).ok()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}
