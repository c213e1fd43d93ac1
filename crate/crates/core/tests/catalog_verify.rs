use fibred_core::acceptance::is_known_failure;
use fibred_core::catalog::{catalog_export, catalog_get, catalog_list};
use fibred_core::transport::Outcome;
use fibred_core::verify::{verify_entry, VerifyOptions};

#[test]
fn only_known_failures_across_the_catalog() {
    let opts = VerifyOptions::default();
    for e in catalog_list() {
        let r = verify_entry(&e, &opts);
        assert!(!r.checks.is_empty(), "{}", e.name);
        for c in &r.checks {
            if c.verdict == Outcome::Fail {
                assert!(is_known_failure(&c.name), "{}: {}", c.name, c.detail);
            }
        }
    }
}

#[test]
fn stated_example_claims_pass() {
    let opts = VerifyOptions::default();
    for name in ["thm1-cs1", "thm1-cs2", "thm1-cs3", "thm3-equal", "linear", "ex1", "ex3", "ex6"] {
        let r = verify_entry(&catalog_get(name).unwrap(), &opts);
        assert_eq!(r.exit_code(), 0, "{name}: {:#?}", r.checks);
    }
}

#[test]
fn export_lists_every_entry_once() {
    let v = catalog_export();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert_eq!(names.len(), catalog_list().len());
    let mut dedup = names.clone();
    dedup.dedup();
    assert_eq!(dedup, names);
}
