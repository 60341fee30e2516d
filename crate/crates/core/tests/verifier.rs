use collatz_core::verifier::Record;
use collatz_core::{classify_trajectory, verify_range, verify_staged, ClassifyOptions, Nat, VerifyConfig};

#[test]
fn staged_cutoff_matches_naive_run() {
    const N: u128 = 100_000;
    let naive = verify_range(&VerifyConfig::new(1, N).cache_limit(0).workers(1)).unwrap();
    for cache in [0, 1 << 12, 1 << 20] {
        let staged = verify_staged(&VerifyConfig::new(1, N).cache_limit(cache), 9_000).unwrap();
        assert_eq!(staged.clone().without_timing(), naive.clone().without_timing(), "cache={cache}");
    }
    assert!(naive.all_verified());
}

#[test]
fn deterministic_across_workers() {
    let base = VerifyConfig::new(1, 200_000).chunk_size(1 << 12);
    let reference = verify_range(&base.clone().workers(1)).unwrap().without_timing();
    for workers in [2, 8] {
        let r = verify_range(&base.clone().workers(workers)).unwrap();
        assert_eq!(r.without_timing(), reference);
    }
}

#[test]
fn excursion_agrees_with_classification() {
    const N: u128 = 10_000;
    let report = verify_range(&VerifyConfig::new(1, N)).unwrap();
    let mut best: Option<Record<Nat>> = None;
    for x in 1..=N {
        let rec = classify_trajectory(&Nat::new(x), &ClassifyOptions::default()).unwrap();
        if best.as_ref().is_none_or(|b| rec.max_excursion > b.value) {
            best = Some(Record { value: rec.max_excursion, argmax: x });
        }
    }
    assert_eq!(report.max_excursion, best);
}

#[test]
fn counts_add_up_under_tight_budget() {
    let report = verify_range(&VerifyConfig::new(1, 5_000).step_budget(60).cache_limit(0)).unwrap();
    assert!(!report.unresolved.is_empty());
    assert_eq!(report.verified_count + report.unresolved.len() as u128, 5_000);
    assert!(report.cycles_found.is_empty());
    let r = report.max_total_stopping_time.unwrap();
    assert!(r.value <= 60 && (1..=5_000).contains(&r.argmax));
}
