use dpsig_core::{
    decide_value, fit_ols, make_partition, noiseless_statistic, p_value, simulate_null_reference,
    t_statistic, Dataset, PrivacyParams,
};
use proptest::prelude::*;

fn dataset(y: &[f64], x1: &[f64], x2: &[f64]) -> Option<Dataset> {
    let data =
        Dataset::from_columns(y.to_vec(), &[x1.to_vec(), x2.to_vec()], &["x1", "x2"]).ok()?;
    fit_ols(&data).ok().map(|_| data)
}

fn design() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (12usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-50.0..50.0f64, n),
            prop::collection::vec(-5.0..5.0f64, n),
            prop::collection::vec(-5.0..5.0f64, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residuals_orthogonal_to_columns((y, x1, x2) in design()) {
        let Some(data) = dataset(&y, &x1, &x2) else { return Ok(()) };
        let fit = fit_ols(&data).unwrap();
        let beta = nalgebra::DVector::from_vec(fit.beta_hat.clone());
        let resid = data.y() - data.x() * beta;
        let scale = data.y().norm() * data.x().norm();
        for k in 0..3 {
            prop_assert!(data.x().column(k).dot(&resid).abs() <= 1e-9 * scale.max(1.0));
        }
    }

    #[test]
    fn negating_y_negates_t((y, x1, x2) in design()) {
        let Some(data) = dataset(&y, &x1, &x2) else { return Ok(()) };
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let flipped = dataset(&neg, &x1, &x2).unwrap();
        for j in 0..3 {
            let t = t_statistic(&fit_ols(&data).unwrap(), j, 0.0).unwrap();
            let u = t_statistic(&fit_ols(&flipped).unwrap(), j, 0.0).unwrap();
            prop_assert!((t + u).abs() <= 1e-8 * t.abs().max(1.0));
        }
    }

    #[test]
    fn adding_c_x_shifts_beta((y, x1, x2) in design(), c in -3.0..3.0f64) {
        let Some(data) = dataset(&y, &x1, &x2) else { return Ok(()) };
        let shifted_y: Vec<f64> = y.iter().zip(&x1).map(|(v, x)| v + c * x).collect();
        let shifted = dataset(&shifted_y, &x1, &x2).unwrap();
        let b0 = fit_ols(&data).unwrap().beta_hat;
        let b1 = fit_ols(&shifted).unwrap().beta_hat;
        prop_assert!((b1[1] - b0[1] - c).abs() <= 1e-8 * (1.0 + b0[1].abs() + c.abs()));
        prop_assert!((b1[2] - b0[2]).abs() <= 1e-8 * (1.0 + b0[2].abs()));
    }

    #[test]
    fn t_is_scale_invariant((y, x1, x2) in design(), s in 0.01..100.0f64) {
        let Some(data) = dataset(&y, &x1, &x2) else { return Ok(()) };
        let scaled_y: Vec<f64> = y.iter().map(|v| s * v).collect();
        let scaled = dataset(&scaled_y, &x1, &x2).unwrap();
        let t = t_statistic(&fit_ols(&data).unwrap(), 1, 0.0).unwrap();
        let u = t_statistic(&fit_ols(&scaled).unwrap(), 1, 0.0).unwrap();
        prop_assert!((t - u).abs() <= 1e-7 * t.abs().max(1.0));
    }

    #[test]
    fn neighbours_move_the_aggregate_by_at_most_the_sensitivity(
        seed in any::<u64>(),
        row in 0usize..200,
        new_y in -100.0..100.0f64,
        new_x in -10.0..10.0f64,
        a in 0.5..5.0f64,
    ) {
        let n = 200;
        let x: Vec<f64> = (0..n).map(|i| ((i * 37 + seed as usize % 11) % 23) as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| 0.1 * x[i] + ((i * 17) % 7) as f64).collect();
        let d1 = Dataset::from_columns(y.clone(), std::slice::from_ref(&x), &["x"]).unwrap();
        let (mut y2, mut x2) = (y, x);
        y2[row] = new_y;
        x2[row] = new_x;
        let d2 = Dataset::from_columns(y2, &[x2], &["x"]).unwrap();
        let m = 10;
        let plan = make_partition(n, m, seed).unwrap();
        let t1 = noiseless_statistic(&d1, 1, 0.0, a, &plan).unwrap();
        let t2 = noiseless_statistic(&d2, 1, 0.0, a, &plan).unwrap();
        let sensitivity = PrivacyParams::new(1.0, m, a).unwrap().sensitivity();
        prop_assert!((t1 - t2).abs() <= sensitivity * (1.0 + 1e-12));
    }
}

#[test]
fn p_value_is_monotone_and_decisions_symmetric() {
    let params = PrivacyParams::new(1.0, 25, 2.0).unwrap();
    let reference = simulate_null_reference(&params, 20_000, 8).unwrap();
    let mut last = f64::INFINITY;
    for i in 0..200 {
        let v = i as f64 * 0.05;
        let p = p_value(v, &reference);
        assert!(p <= last);
        last = p;
        assert_eq!(p, p_value(-v, &reference));
        let up = decide_value(v, &reference, 0.05).unwrap();
        let down = decide_value(-v, &reference, 0.05).unwrap();
        assert_eq!(up, down);
        if up.p_value <= 0.05 {
            assert!(up.reject);
        }
    }
}
