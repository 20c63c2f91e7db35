//! Assembly, simulation and ledgers for every system.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use phs_core::audit::smooth_state;
use phs_core::integrator::{algebraic_residual, consistent_init, simulate, simulate_partial};
use phs_core::models::{
    build_system, BeamParams, ModelFamily, ModelParams, Representation, SystemKind,
};
use phs_core::{BoundaryMode, Error, Grid1D, PhDescriptor};

const MODES: [BoundaryMode; 2] = [BoundaryMode::Free, BoundaryMode::Clamped];

fn build(kind: SystemKind, n: usize, mode: BoundaryMode) -> PhDescriptor {
    let g = Grid1D::new(0.0, 1.0, n).unwrap();
    build_system(kind, &ModelParams::defaults(kind.family()), &g, mode).unwrap()
}

#[test]
fn every_system_passes_its_structure_checks() {
    for kind in SystemKind::ALL {
        for mode in MODES {
            let d = build(kind, 21, mode);
            for c in d.structure_checks() {
                assert!(
                    c.passed,
                    "{}: {} {:e} ({})",
                    d.name(),
                    c.name,
                    c.residual,
                    c.detail
                );
            }
        }
    }
}

#[test]
fn representation_pairs_are_validated() {
    assert!(SystemKind::new(ModelFamily::Dzektser, Representation::Implicit).is_err());
    assert!(SystemKind::new(ModelFamily::Timoshenko, Representation::ExplicitDae).is_err());
    assert_eq!(
        SystemKind::new(ModelFamily::EulerBernoulli, Representation::ImplicitReduced).unwrap(),
        SystemKind::EbImplicitReduced
    );
    assert!("shell".parse::<ModelFamily>().is_err());
}

#[test]
fn invalid_parameters_are_config_errors() {
    let g = Grid1D::new(0.0, 1.0, 11).unwrap();
    let mut p = ModelParams::defaults(ModelFamily::Timoshenko);
    p.set("rho", -1.0).unwrap();
    let r = build_system(SystemKind::TimoshenkoExplicit, &p, &g, BoundaryMode::Free);
    assert!(matches!(r, Err(Error::Config(_))));
    let mut p = ModelParams::defaults(ModelFamily::Nanorod);
    p.set("tau_d", -0.5).unwrap();
    let r = build_system(SystemKind::NanorodImplicit, &p, &g, BoundaryMode::Free);
    assert!(matches!(r, Err(Error::Config(_))));
    assert!(p.set("nonsense", 1.0).is_err());
    assert!(BeamParams {
        e_mod: f64::NAN,
        ..Default::default()
    }
    .validate()
    .is_err());
}

#[test]
fn free_runs_balance_and_clamped_dofs_stay_fixed() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kind in SystemKind::ALL {
        for mode in MODES {
            let d = build(kind, 41, mode);
            let x0 = smooth_state(&d, &mut rng);
            let dt = d.default_dt();
            let traj = simulate(&d, &x0, 20.0 * dt, dt).unwrap();
            assert_eq!(traj.len(), 21);
            assert_eq!(traj.ledger.len(), 20);
            let r = traj.ledger.max_relative_residual();
            assert!(r < 1e-8, "{}: residual {r:e}", d.name());
            for x in &traj.states[1..] {
                for &i in d.fixed() {
                    assert_eq!(x[i], 0.0, "{}: dof {i}", d.name());
                }
            }
        }
    }
}

#[test]
fn dae_starts_on_the_constraint_manifold() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for kind in [SystemKind::EbExplicitDae, SystemKind::EbImplicitDae] {
        for mode in MODES {
            let d = build(kind, 31, mode);
            let raw = smooth_state(&d, &mut rng);
            assert!(algebraic_residual(&d, &raw) > 1e-6);
            let x = consistent_init(&d, &raw).unwrap();
            assert!(algebraic_residual(&d, &x) < 1e-10, "{}", d.name());
            let traj = simulate(&d, &raw, 0.01, 1e-3).unwrap();
            for s in &traj.states {
                assert!(algebraic_residual(&d, s) < 1e-9);
            }
        }
    }
}

#[test]
fn zero_state_is_steady_and_zero_energy() {
    for kind in SystemKind::ALL {
        let d = build(kind, 15, BoundaryMode::Clamped);
        let traj = simulate(&d, &vec![0.0; d.dim()], 0.05, 0.01).unwrap();
        assert!(traj.states.iter().all(|x| x.iter().all(|&v| v == 0.0)));
        assert_eq!(d.eval_hamiltonian(&traj.states[5]).unwrap(), 0.0);
    }
}

#[test]
fn simulation_inputs_are_checked() {
    let d = build(SystemKind::TimoshenkoExplicit, 11, BoundaryMode::Free);
    let x = vec![0.0; d.dim()];
    assert!(simulate(&d, &x, 1.0, 0.0).is_err());
    assert!(simulate(&d, &x, -1.0, 0.1).is_err());
    assert!(matches!(
        simulate(&d, &x[1..], 0.1, 0.1),
        Err(Error::Dimension { .. })
    ));
    let (traj, err) = simulate_partial(&d, &x, 0.0, 0.1);
    assert!(err.is_none());
    assert_eq!(traj.len(), 1);
}

#[test]
fn runs_are_bitwise_reproducible() {
    let d = build(SystemKind::NanorodImplicit, 31, BoundaryMode::Free);
    let x0 = smooth_state(&d, &mut ChaCha8Rng::seed_from_u64(9));
    let a = simulate(&d, &x0, 0.05, 0.005).unwrap();
    let b = simulate(&d, &x0, 0.05, 0.005).unwrap();
    assert_eq!(a.states, b.states);
    assert_eq!(a.ledger.rows, b.ledger.rows);
}
