//! Discrete Green identities of the SBP derivative and its powers.

use std::f64::consts::PI;

use phs_core::sbp::{compose_power, green_residual};
use phs_core::{Error, Grid1D, SbpSet};

fn sbp(n: usize) -> SbpSet {
    SbpSet::new(&Grid1D::new(0.0, 1.0, n).unwrap())
}

#[test]
fn first_power_closes_with_end_values() {
    let s = sbp(41);
    let u = s.grid().sample(|x| (2.0 * x).cos());
    let v = s.grid().sample(|x| x.exp());
    let lhs = s.inner(&s.apply_d(&u), &v) + s.inner(&u, &s.apply_d(&v));
    let rhs = u[40] * v[40] - u[0] * v[0];
    assert!((lhs - rhs).abs() < 1e-13, "{lhs} vs {rhs}");
}

#[test]
fn quadrature_is_exact_on_linears() {
    let s = sbp(17);
    let u = s.grid().sample(|x| 3.0 * x - 1.0);
    assert!((s.integrate(&u) - 0.5).abs() < 1e-14);
}

#[test]
fn powers_close_on_smooth_pairs() {
    for n in [11, 51, 201] {
        let s = sbp(n);
        let u = s.grid().sample(|x| (PI * x).sin() + x * x);
        let v = s.grid().sample(|x| (3.0 * x).cos());
        for k in 1..=4 {
            let op = compose_power(&s, k).unwrap();
            let scale = s.h_norm(&op.matrix.matvec(&u)) * s.h_norm(&v) + 1.0;
            let r = green_residual(&op, &u, &v).unwrap() / scale;
            assert!(r < 1e-10, "n = {n}, k = {k}: {r:e}");
        }
    }
}

#[test]
fn pairing_vanishes_for_compactly_supported_data() {
    let s = sbp(31);
    let u: Vec<f64> = (0..31)
        .map(|i| {
            if (8..23).contains(&i) {
                (i as f64).sin()
            } else {
                0.0
            }
        })
        .collect();
    let v: Vec<f64> = (0..31).map(|i| (i as f64 * 0.3).cos()).collect();
    for k in 1..=4 {
        let op = compose_power(&s, k).unwrap();
        assert!(op.pairing(&u, &v).abs() < 1e-12, "k = {k}");
    }
}

#[test]
fn adjoint_sign_alternates() {
    let s = sbp(9);
    for k in 1..=4 {
        let op = compose_power(&s, k).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(op.formal_adjoint, op.matrix.scale(sign));
    }
}

#[test]
fn bad_inputs_are_rejected() {
    let s = sbp(9);
    assert!(matches!(compose_power(&s, 5), Err(Error::Config(_))));
    let op = compose_power(&s, 2).unwrap();
    assert!(matches!(
        green_residual(&op, &[0.0; 8], &[0.0; 9]),
        Err(Error::Dimension {
            expected: 9,
            got: 8,
            ..
        })
    ));
    assert!(Grid1D::new(0.0, 1.0, 1).is_err());
    assert!(Grid1D::new(1.0, 0.0, 5).is_err());
}
