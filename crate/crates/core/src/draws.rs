//! Chunked, seed-deterministic Monte Carlo draws shared by the null
//! reference and the power simulations.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dist::sample_laplace;
use crate::release::rescaled_mean;
use crate::rng::{chunk_rng, CHUNK};

fn fill_chunked<F>(n: usize, seed: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    let mut out = vec![0.0; n];
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(chunk, slot)| {
            let mut rng = chunk_rng(seed, chunk);
            for v in slot.iter_mut() {
                *v = draw(&mut rng);
            }
        });
    out
}

/// `n` draws of `√M · mean(clamp(Z_l, −a, a))` with `Z_1..Z_M ~ N(location, 1)`.
pub fn truncated_mean_draws(m: usize, a: f64, location: f64, n: usize, seed: u64) -> Vec<f64> {
    fill_chunked(n, seed, |rng| {
        let mut sum = 0.0;
        for _ in 0..m {
            let z: f64 = rng.sample(StandardNormal);
            sum += (z + location).clamp(-a, a);
        }
        rescaled_mean(sum, m)
    })
}

/// `n` draws of Laplace(0, 1). Scaling them by `s` gives Laplace(0, s) draws
/// from the same uniforms, so one vector serves every ε.
pub fn standard_laplace_draws(n: usize, seed: u64) -> Vec<f64> {
    fill_chunked(n, seed, |rng| sample_laplace(0.0, 1.0, rng))
}

/// `n` draws of N(location, 1).
pub fn normal_draws(location: f64, n: usize, seed: u64) -> Vec<f64> {
    fill_chunked(n, seed, |rng| {
        location + rng.sample::<f64, _>(StandardNormal)
    })
}

/// `base + scale · noise`, elementwise. A zero scale returns `base` unchanged.
pub fn add_scaled(base: &[f64], noise: &[f64], scale: f64) -> Vec<f64> {
    if scale == 0.0 {
        return base.to_vec();
    }
    base.iter().zip(noise).map(|(b, e)| b + scale * e).collect()
}
