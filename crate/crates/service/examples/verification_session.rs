//! A budgeted verification session: upload a CSV, open a session with a
//! total ε, run queries until the budget runs out, then replay the ledger.

use dpsig_service::{ServiceError, VerificationQuery, VerificationService};

fn main() -> Result<(), ServiceError> {
    let mut csv = String::from("hours,age,wage\n");
    for i in 0..3_000u64 {
        let hours = 20.0 + (i % 30) as f64;
        let age = 25.0 + ((i * 13) % 40) as f64;
        let noise = ((i * 7_919) % 1_000) as f64 / 100.0 - 5.0;
        csv.push_str(&format!("{hours},{age},{}\n", 3.0 + 0.2 * hours + noise));
    }

    let service = VerificationService::new();
    let dataset_id = service.add_dataset(csv.as_bytes())?;
    let session = service.open_session(&dataset_id, 2.0)?;

    for (k, coefficient) in ["hours", "age", "(Intercept)"].iter().enumerate() {
        let query = VerificationQuery {
            dataset_id: dataset_id.clone(),
            response_column: "wage".into(),
            predictor_columns: vec!["hours".into(), "age".into()],
            coefficient: coefficient.to_string(),
            null_value: 0.0,
            epsilon: 0.75,
            m: 25,
            a: 2.0,
            alpha: 0.05,
            n_mc: 20_000,
            seed: Some(100 + k as u64),
        };
        match service.submit_query(&session, &query) {
            Ok(r) => println!(
                "{coefficient:>12}: released {:+.3}, p = {:.4}, reject = {}",
                r.released_value, r.p_value, r.reject
            ),
            Err(e) => println!("{coefficient:>12}: {e}"),
        }
    }

    let status = service.budget_status(&session)?;
    println!(
        "remaining epsilon {} of {}",
        status.epsilon_remaining, status.epsilon_total
    );
    let replayed = service.replay(&status.entries)?;
    let identical = replayed
        .iter()
        .zip(&status.entries)
        .all(|(r, e)| r == &e.result);
    println!("replay reproduces {} entries: {identical}", replayed.len());
    Ok(())
}
