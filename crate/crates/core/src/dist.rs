//! Laplace and standard-normal distribution helpers.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Inverse-CDF transform of `u ∈ (−½, ½)` to a Laplace(location, scale) draw:
/// `location − scale·sign(u)·ln(1 − 2|u|)`.
pub fn laplace_from_uniform(location: f64, scale: f64, u: f64) -> f64 {
    let sign = if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    };
    location - scale * sign * (1.0 - 2.0 * u.abs()).ln()
}

/// Draws Laplace(location, scale) by inverse CDF with `u ~ Uniform(−½, ½)`.
pub fn sample_laplace<R: Rng + ?Sized>(location: f64, scale: f64, rng: &mut R) -> f64 {
    laplace_from_uniform(location, scale, standard_uniform(rng))
}

/// Uniform on the open interval (−½, ½); the endpoint −½ would map to −∞.
fn standard_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = rng.random::<f64>() - 0.5;
        if u > -0.5 {
            return u;
        }
    }
}

pub fn laplace_cdf(x: f64, location: f64, scale: f64) -> f64 {
    let z = (x - location) / scale;
    if z < 0.0 {
        0.5 * z.exp()
    } else {
        1.0 - 0.5 * (-z).exp()
    }
}

/// `P(lo < X < hi)` for `X ~ Laplace(location, scale)`.
pub fn laplace_interval_probability(lo: f64, hi: f64, location: f64, scale: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if scale == 0.0 {
        return if lo < location && location < hi {
            1.0
        } else {
            0.0
        };
    }
    // both endpoints on the same side: subtract exponentials directly so tiny
    // probabilities keep their relative precision
    let a = (lo - location) / scale;
    let b = (hi - location) / scale;
    if b <= 0.0 {
        0.5 * (b.exp() - a.exp())
    } else if a >= 0.0 {
        0.5 * ((-a).exp() - (-b).exp())
    } else {
        1.0 - 0.5 * (-b).exp() - 0.5 * a.exp()
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

pub fn normal_cdf(x: f64) -> f64 {
    standard_normal().cdf(x)
}

pub fn normal_quantile(p: f64) -> f64 {
    standard_normal().inverse_cdf(p)
}
