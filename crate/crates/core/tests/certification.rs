//! Certification of correct systems and detection of broken ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use phs_core::audit::{certify, rederive_balance, smooth_state, DEFAULT_SEED};
use phs_core::blockop::DPoly;
use phs_core::descriptor::TermKind;
use phs_core::integrator::simulate;
use phs_core::models::{
    build_system, nanorod_implicit_parts, ModelParams, NanorodParams, SystemKind,
};
use phs_core::{BoundaryMode, Grid1D, PhDescriptor};

fn grid(n: usize) -> Grid1D {
    Grid1D::new(0.0, 1.0, n).unwrap()
}

#[test]
fn every_system_certifies() {
    for kind in SystemKind::ALL {
        for mode in [BoundaryMode::Free, BoundaryMode::Clamped] {
            let d =
                build_system(kind, &ModelParams::defaults(kind.family()), &grid(31), mode).unwrap();
            let report = certify(&d, DEFAULT_SEED);
            let failed: Vec<_> = report.failures().map(|e| e.name.clone()).collect();
            assert!(report.passed(), "{}: {failed:?}", d.name());
            assert_eq!(report.seed, DEFAULT_SEED);
        }
    }
}

#[test]
fn corrupted_structure_block_is_localized() {
    let d = build_system(
        SystemKind::TimoshenkoExplicit,
        &ModelParams::defaults(SystemKind::TimoshenkoExplicit.family()),
        &grid(31),
        BoundaryMode::Free,
    )
    .unwrap();
    let mut parts = d.into_parts();
    // a non-skew coupling from p_phi into eps_phi only
    let original = parts.structure_j.get(2, 3).clone();
    parts
        .structure_j
        .set(2, 3, original.add(&DPoly::constant(0.5)));
    let broken = PhDescriptor::assemble_unchecked(parts).unwrap();
    let report = certify(&broken, DEFAULT_SEED);
    let skew = report.entry("skew_modulo_boundary").unwrap();
    assert!(!skew.passed);
    assert!(
        skew.detail.contains("eps_phi") && skew.detail.contains("p_phi"),
        "{}",
        skew.detail
    );
    assert!(report.entry("lagrange_symmetry").unwrap().passed);
}

#[test]
fn negative_relaxation_time_fails_dissipation() {
    let params = NanorodParams {
        tau_d: -0.5,
        ..Default::default()
    };
    let parts = nanorod_implicit_parts(&params, &grid(31), BoundaryMode::Clamped).unwrap();
    let broken = PhDescriptor::assemble_unchecked(parts).unwrap();
    let report = certify(&broken, DEFAULT_SEED);
    assert!(!report.passed());
    let diss = report.entry("dissipation_semidefinite").unwrap();
    assert!(!diss.passed, "{diss:?}");
}

#[test]
fn rederived_balance_matches_the_ledger() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for kind in SystemKind::ALL {
        let d = build_system(
            kind,
            &ModelParams::defaults(kind.family()),
            &grid(41),
            BoundaryMode::Free,
        )
        .unwrap();
        let dt = d.default_dt();
        let traj = simulate(&d, &smooth_state(&d, &mut rng), 10.0 * dt, dt).unwrap();
        let report = rederive_balance(&d, &traj).unwrap();
        assert_eq!(report.times.len(), 10);
        assert!(
            report.max_ledger_gap() < 1e-9,
            "{}: gap {:e}",
            d.name(),
            report.max_ledger_gap()
        );
        assert!(
            report.max_residual() < 1e-8,
            "{}: {:e}",
            d.name(),
            report.max_residual()
        );
        assert!(
            report.max_relative(TermKind::Boundary) > 0.0,
            "{}",
            d.name()
        );
        if kind.is_lossless() {
            assert_eq!(report.max_relative(TermKind::Dissipation), 0.0);
        } else {
            assert!(report.total(0, TermKind::Dissipation) > 0.0);
        }
    }
}
