//! Non-private OLS on a small synthetic design.

use dpsig_core::{fit_ols, t_statistic, Dataset};

fn main() -> Result<(), dpsig_core::Error> {
    let hours: Vec<f64> = (0..200).map(|i| 20.0 + (i % 30) as f64).collect();
    let age: Vec<f64> = (0..200).map(|i| 25.0 + ((i * 13) % 40) as f64).collect();
    let wage: Vec<f64> = hours
        .iter()
        .zip(&age)
        .enumerate()
        .map(|(i, (h, a))| 3.0 + 0.4 * h + 0.1 * a + (((i * 37) % 11) as f64 - 5.0))
        .collect();

    let data = Dataset::from_columns(wage, &[hours, age], &["hours", "age"])?;
    let fit = fit_ols(&data)?;
    println!(
        "{:>12} {:>10} {:>10} {:>8}",
        "term", "estimate", "std.err", "t"
    );
    for (j, name) in data.column_names().iter().enumerate() {
        println!(
            "{:>12} {:>10.4} {:>10.4} {:>8.2}",
            name,
            fit.beta_hat[j],
            fit.std_error(j)?,
            t_statistic(&fit, j, 0.0)?
        );
    }
    println!("sigma^2 = {:.4} on {} df", fit.sigma2_hat, fit.df);
    Ok(())
}
