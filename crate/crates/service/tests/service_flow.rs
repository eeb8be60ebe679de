mod common;

use common::{query, synthetic_csv};
use dpsig_service::ledger::{read_log, to_units};
use dpsig_service::{ServiceError, VerificationService};

fn service_with_data() -> (VerificationService, String) {
    let service = VerificationService::new();
    let id = service
        .add_dataset(&synthetic_csv(600, &[0.2, 0.0, -0.1], 1))
        .unwrap();
    (service, id)
}

#[test]
fn sessions_start_full_and_are_independent() {
    let (service, id) = service_with_data();
    let s1 = service.open_session(&id, 3.0).unwrap();
    let s2 = service.open_session(&id, 3.0).unwrap();
    assert_eq!(service.budget_status(&s1).unwrap().epsilon_remaining, 3.0);
    service
        .submit_query(&s1, &query(&id, 1.0, Some(1)))
        .unwrap();
    assert_eq!(service.budget_status(&s1).unwrap().epsilon_remaining, 2.0);
    assert_eq!(service.budget_status(&s2).unwrap().epsilon_remaining, 3.0);

    assert!(matches!(
        service.open_session(&id, 0.0),
        Err(ServiceError::InvalidBudget(_))
    ));
    assert!(matches!(
        service.open_session("nope", 1.0),
        Err(ServiceError::UnknownDataset(_))
    ));
}

#[test]
fn second_query_exceeding_budget_is_refused() {
    let (service, id) = service_with_data();
    let s = service.open_session(&id, 1.5).unwrap();
    service.submit_query(&s, &query(&id, 1.0, Some(2))).unwrap();
    let err = service
        .submit_query(&s, &query(&id, 1.0, Some(3)))
        .unwrap_err();
    assert!(matches!(err, ServiceError::BudgetExhausted { .. }));
    let status = service.budget_status(&s).unwrap();
    assert_eq!(status.entries.len(), 1);
    assert_eq!(status.epsilon_remaining, 0.5);
}

#[test]
fn repeated_query_is_identical_but_charged_twice() {
    let (service, id) = service_with_data();
    let s = service.open_session(&id, 2.0).unwrap();
    let first = service
        .submit_query(&s, &query(&id, 0.5, Some(99)))
        .unwrap();
    let second = service
        .submit_query(&s, &query(&id, 0.5, Some(99)))
        .unwrap();
    assert_eq!(
        first.released_value.to_bits(),
        second.released_value.to_bits()
    );
    assert_eq!(first.p_value, second.p_value);
    assert_ne!(first.query_id, second.query_id);
    assert_eq!(service.budget_status(&s).unwrap().epsilon_remaining, 1.0);
}

#[test]
fn failed_release_is_not_charged() {
    let (service, id) = service_with_data();
    let s = service.open_session(&id, 1.0).unwrap();
    let mut too_many_subsets = query(&id, 0.5, Some(4));
    too_many_subsets.m = 200;
    assert!(service.submit_query(&s, &too_many_subsets).is_err());
    let mut unknown = query(&id, 0.5, Some(4));
    unknown.coefficient = "x9".into();
    assert!(matches!(
        service.submit_query(&s, &unknown),
        Err(ServiceError::InvalidQuery(_))
    ));
    let status = service.budget_status(&s).unwrap();
    assert_eq!(status.epsilon_remaining, 1.0);
    assert!(status.entries.is_empty());
}

#[test]
fn intercept_and_unseeded_queries() {
    let (service, id) = service_with_data();
    let s = service.open_session(&id, 1.0).unwrap();
    let mut q = query(&id, 0.5, None);
    q.coefficient = "(Intercept)".into();
    let result = service.submit_query(&s, &q).unwrap();
    let entry = &service.budget_status(&s).unwrap().entries[0];
    assert_eq!(entry.seed, result.seed_used);
    assert_eq!(
        service.replay(std::slice::from_ref(entry)).unwrap()[0],
        result
    );
}

#[test]
fn json_lines_ledger_replays_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let service = VerificationService::with_ledger_dir(dir.path()).unwrap();
    let id = service
        .add_dataset(&synthetic_csv(600, &[0.2, 0.0, -0.1], 5))
        .unwrap();
    let s = service.open_session(&id, 2.0).unwrap();
    let results: Vec<_> = (0..4)
        .map(|k| {
            service
                .submit_query(&s, &query(&id, 0.25, Some(k)))
                .unwrap()
        })
        .collect();

    let entries = read_log(dir.path().join(format!("{s}.jsonl"))).unwrap();
    assert_eq!(entries.len(), 4);
    let spent: u64 = entries.iter().map(|e| to_units(e.epsilon_spent)).sum();
    assert_eq!(
        spent + to_units(service.budget_status(&s).unwrap().epsilon_remaining),
        to_units(2.0)
    );

    // a fresh service holding only the data reproduces every result
    let fresh = VerificationService::new();
    fresh
        .add_dataset(&synthetic_csv(600, &[0.2, 0.0, -0.1], 5))
        .unwrap();
    assert_eq!(fresh.replay(&entries).unwrap(), results);
}
