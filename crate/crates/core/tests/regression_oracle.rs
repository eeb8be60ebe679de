mod common;

use common::normal_equations;
use dpsig_core::{fit_ols, subset_fit, t_statistic, Dataset, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_instance(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let y = (0..n)
        .map(|i| {
            let signal: f64 = cols
                .iter()
                .enumerate()
                .map(|(k, c)| (k as f64 + 0.5) * c[i])
                .sum();
            1.0 + signal + rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    (y, cols)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..100 {
        let (y, cols) = random_instance(&mut rng, 20, 3);
        let names = ["x1", "x2", "x3"];
        let data = Dataset::from_columns(y.clone(), &cols, &names).unwrap();
        let fit = fit_ols(&data).unwrap();
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                std::iter::once(1.0)
                    .chain(cols.iter().map(|c| c[i]))
                    .collect()
            })
            .collect();
        let (beta, s2, diag) = normal_equations(&rows, &y);
        for j in 0..4 {
            assert!(rel(fit.beta_hat[j], beta[j]) < 1e-10, "beta {j}");
            assert!(rel(fit.cov_scaled[(j, j)], diag[j]) < 1e-10);
        }
        assert!(rel(fit.sigma2_hat, s2) < 1e-10);
    }
}

#[test]
fn three_point_example() {
    let data = Dataset::from_columns(vec![1.0, 2.0, 4.0], &[vec![1.0, 2.0, 3.0]], &["x"]).unwrap();
    let t = t_statistic(&fit_ols(&data).unwrap(), 1, 0.0).unwrap();
    assert!((t - 27f64.sqrt()).abs() < 1e-9, "t = {t}");
}

#[test]
fn subset_fit_equals_fit_on_copied_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (y, cols) = random_instance(&mut rng, 60, 2);
    let data = Dataset::from_columns(y.clone(), &cols, &["a", "b"]).unwrap();
    let rows: Vec<usize> = (0..60).filter(|i| i % 3 != 1).collect();
    let sub_y: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    let sub_cols: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| rows.iter().map(|&i| c[i]).collect())
        .collect();
    let direct = fit_ols(&Dataset::from_columns(sub_y, &sub_cols, &["a", "b"]).unwrap()).unwrap();
    let via_subset = subset_fit(&data, &rows).unwrap();
    for j in 0..3 {
        assert!(rel(via_subset.beta_hat[j], direct.beta_hat[j]) < 1e-12);
    }
}

#[test]
fn collinear_design_is_rejected() {
    let x: Vec<f64> = (0..10).map(f64::from).collect();
    let twice: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let y: Vec<f64> = x.iter().map(|v| v * v).collect();
    let data = Dataset::from_columns(y, &[x, twice], &["x", "2x"]).unwrap();
    assert!(matches!(fit_ols(&data), Err(Error::RankDeficient { .. })));
}
