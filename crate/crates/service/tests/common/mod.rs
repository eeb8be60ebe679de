#![allow(dead_code)]

use std::fmt::Write;

use dpsig_service::VerificationQuery;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// CSV with predictors `x1..x{p}` drawn standard normal and
/// `y = 1 + Σ beta_k·x_k + N(0, 1)`.
pub fn synthetic_csv(n: usize, beta: &[f64], seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = beta.len();
    let mut out = String::new();
    let header: Vec<String> = (1..=p)
        .map(|k| format!("x{k}"))
        .chain(["y".into()])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for _ in 0..n {
        let xs: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let noise: f64 = rng.sample(StandardNormal);
        let y = 1.0 + xs.iter().zip(beta).map(|(x, b)| x * b).sum::<f64>() + noise;
        for x in &xs {
            write!(out, "{x},").unwrap();
        }
        writeln!(out, "{y}").unwrap();
    }
    out.into_bytes()
}

pub fn query(dataset_id: &str, epsilon: f64, seed: Option<u64>) -> VerificationQuery {
    VerificationQuery {
        dataset_id: dataset_id.to_string(),
        response_column: "y".into(),
        predictor_columns: vec!["x1".into(), "x2".into(), "x3".into()],
        coefficient: "x1".into(),
        null_value: 0.0,
        epsilon,
        m: 10,
        a: 2.0,
        alpha: 0.05,
        n_mc: 2_000,
        seed,
    }
}
