//! Verification suites called as a library.

use phs::suites::{self, Suite, VerifyOptions};

const OPTS: VerifyOptions = VerifyOptions {
    tol_mult: 1.0,
    seed: 17,
};

#[test]
fn every_suite_passes() {
    let reports = suites::run(Suite::All, OPTS);
    let names: Vec<_> = reports.iter().map(|r| r.suite).collect();
    assert_eq!(names, ["structure", "transforms", "diagram", "variational"]);
    for r in &reports {
        assert!(r.passed(), "{}: {:?}", r.suite, r.failures);
        assert!(r.tables.iter().all(|t| !t.rows.is_empty()));
    }
}

#[test]
fn tables_are_reproducible() {
    let a = suites::run(Suite::Transforms, OPTS);
    let b = suites::run(Suite::Transforms, OPTS);
    assert_eq!(a[0].tables, b[0].tables);
}

#[test]
fn structure_covers_every_system_mode_and_scale() {
    let r = &suites::run(Suite::Structure, OPTS)[0];
    let t = &r.tables[0];
    let systems: std::collections::BTreeSet<_> = t.rows.iter().map(|row| row[0].clone()).collect();
    assert_eq!(systems.len(), 2 * phs::core::models::SystemKind::ALL.len());
    assert!(t.rows.iter().any(|row| row[1] == "0.5"));
}
