//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the verdicts always reach stdout.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phs_core::audit::{
    smooth_field, smooth_state, variational_derivative_check, SobolevEnergy, DEFAULT_SEED,
};
use phs_core::integrator::{consistent_init, simulate};
use phs_core::models::{build_system, BeamParams, ModelFamily, ModelParams, SystemKind};
use phs_core::sbp::{compose_power, green_residual};
use phs_core::transforms::{admissible_state, verify_diagram, verify_transforms};
use phs_core::{BoundaryMode, Grid1D, PhDescriptor, SbpSet};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn grid(n: usize) -> Grid1D {
    Grid1D::new(0.0, 1.0, n).unwrap()
}

fn system(kind: SystemKind, params: &ModelParams, n: usize, mode: BoundaryMode) -> PhDescriptor {
    build_system(kind, params, &grid(n), mode).unwrap()
}

fn defaults(kind: SystemKind) -> ModelParams {
    ModelParams::defaults(kind.family())
}

fn judge(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn green_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst = 0.0f64;
    for n in [11, 51, 201] {
        let sbp = SbpSet::new(&grid(n));
        for k in 1..=4 {
            let op = compose_power(&sbp, k).unwrap();
            for _ in 0..1000 {
                let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let ku = op.matrix.matvec(&u);
                let kv = op.formal_adjoint.matvec(&v);
                let scale = sbp.inner(&ku, &v).abs()
                    + sbp.inner(&u, &kv).abs()
                    + op.pairing(&u, &v).abs()
                    + sbp.h_norm(&ku) * sbp.h_norm(&v);
                worst = worst.max(green_residual(&op, &u, &v).unwrap() / scale);
            }
        }
    }
    judge(
        worst <= 1e-10,
        format!("max relative residual {worst:.2e} (limit 1e-10)"),
    )
}

fn power_balance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut lines = Vec::new();
    let mut ok = true;
    for kind in SystemKind::ALL {
        let desc = system(kind, &defaults(kind), 101, BoundaryMode::Free);
        let x0 = smooth_state(&desc, &mut rng);
        let dt = desc.default_dt();
        let traj = simulate(&desc, &x0, 100.0 * dt, dt).unwrap();
        let rows = &traj.ledger.rows;
        let residual = traj.ledger.max_relative_residual();
        let h_max = rows.iter().map(|r| r.h.abs()).fold(0.0, f64::max);
        let boundary = rows
            .iter()
            .map(|r| r.boundary_power.abs().max(r.boundary_energy_rate.abs()))
            .fold(0.0, f64::max);
        // the boundary terms must be a visible share of the balance
        let nontrivial = boundary > 1e-6 * h_max;
        ok &= rows.len() >= 100 && residual <= 1e-8 && nontrivial;
        lines.push(format!("{kind} {residual:.1e} (boundary {boundary:.1e})"));
    }
    judge(ok, lines.join(", "))
}

fn dissipativity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut lines = Vec::new();
    let mut ok = true;
    for kind in [
        SystemKind::DzektserExplicit,
        SystemKind::NanorodExplicit,
        SystemKind::NanorodImplicit,
    ] {
        let desc = system(kind, &defaults(kind), 101, BoundaryMode::Clamped);
        let x0 = smooth_state(&desc, &mut rng);
        let dt = desc.default_dt();
        let traj = simulate(&desc, &x0, 200.0 * dt, dt).unwrap();
        let h: Vec<f64> = traj
            .states
            .iter()
            .map(|x| desc.eval_hamiltonian(x).unwrap())
            .collect();
        let worst_rise = h.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max);
        let decayed = h[h.len() - 1] < h[0];
        ok &= worst_rise <= 1e-10 * h[0] && decayed;
        lines.push(format!(
            "{kind} worst rise {:.1e} H0, H {:.3e} -> {:.3e}",
            worst_rise / h[0],
            h[0],
            h[h.len() - 1]
        ));
    }
    judge(ok, lines.join(", "))
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst = 0.0f64;
    let mut lines = Vec::new();
    for kind in SystemKind::ALL.into_iter().filter(|k| k.is_lossless()) {
        let desc = system(kind, &defaults(kind), 101, BoundaryMode::Clamped);
        let x0 = smooth_state(&desc, &mut rng);
        let dt = desc.default_dt();
        let traj = simulate(&desc, &x0, 200.0 * dt, dt).unwrap();
        let h0 = desc.eval_hamiltonian(&traj.states[0]).unwrap();
        let drift = traj
            .states
            .iter()
            .map(|x| (desc.eval_hamiltonian(x).unwrap() - h0).abs() / h0)
            .fold(0.0, f64::max);
        worst = worst.max(drift);
        lines.push(format!("{kind} {drift:.1e}"));
    }
    judge(worst <= 1e-9, lines.join(", "))
}

fn beam_draws() -> Vec<BeamParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut draws = vec![BeamParams::default()];
    for _ in 0..2 {
        let mut d = || rng.gen_range(0.1..10.0);
        draws.push(BeamParams {
            rho: d(),
            a_sec: d(),
            i_mom: d(),
            e_mod: d(),
            t0: d(),
            kappa_g: d(),
        });
    }
    draws
}

/// Rows of the transform report: the four conjugations, or the projector.
fn transform_rows(projector: bool) -> Outcome {
    let g = grid(101);
    let mut ok = true;
    let mut lines = Vec::new();
    for (i, p) in beam_draws().iter().enumerate() {
        let report = verify_transforms(p, &g).unwrap();
        for (name, res, tol) in report.rows() {
            if name.starts_with("Pi") != projector {
                continue;
            }
            ok &= res <= tol;
            lines.push(format!("draw {i} {name}: {res:.1e} <= {tol:.1e}"));
        }
    }
    judge(ok, lines.join(", "))
}

fn diagram() -> Outcome {
    let g = grid(101);
    let sbp = SbpSet::new(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst = 0.0f64;
    for p in beam_draws().iter().take(2) {
        let w = smooth_field(&mut rng, &sbp);
        let pw = smooth_field(&mut rng, &sbp);
        let z0 = admissible_state(&g, &w, &pw, &vec![0.0; g.len()]);
        let report = verify_diagram(p, &g, &z0, 50.0 * 1e-3, 1e-3).unwrap();
        if report.rows.len() < 50 {
            return Err(format!("only {} steps", report.rows.len()));
        }
        worst = worst.max(report.max());
    }
    judge(
        worst <= 1e-7,
        format!("max discrepancy {worst:.2e} over 50 steps (limit 1e-7)"),
    )
}

fn dae_reduced() -> Outcome {
    let n = 101;
    let params = ModelParams::defaults(ModelFamily::EulerBernoulli);
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut lines = Vec::new();
    let mut ok = true;
    // reduced field r sits at DAE field shared[r]
    let pairs = [
        (
            SystemKind::EbExplicitDae,
            SystemKind::EbExplicitReduced,
            vec![0, 2, 1],
        ),
        (
            SystemKind::EbImplicitDae,
            SystemKind::EbImplicitReduced,
            vec![0, 1],
        ),
    ];
    for mode in [BoundaryMode::Free, BoundaryMode::Clamped] {
        for (dae, reduced, shared) in &pairs {
            let dd = system(*dae, &params, n, mode);
            let rd = system(*reduced, &params, n, mode);
            let xr = consistent_init(&rd, &smooth_state(&rd, &mut rng)).unwrap();
            let mut xd = vec![0.0; dd.dim()];
            for (r, &f) in shared.iter().enumerate() {
                xd[f * n..(f + 1) * n].copy_from_slice(&xr[r * n..(r + 1) * n]);
            }
            let dt = rd.default_dt();
            let td = simulate(&dd, &xd, 100.0 * dt, dt).unwrap();
            let tr = simulate(&rd, &xr, 100.0 * dt, dt).unwrap();
            let mut worst = 0.0f64;
            for (a, b) in td.states.iter().zip(&tr.states) {
                let (mut num, mut den) = (0.0, 0.0);
                for (r, &f) in shared.iter().enumerate() {
                    for i in 0..n {
                        num += (a[f * n + i] - b[r * n + i]).powi(2);
                        den += b[r * n + i].powi(2);
                    }
                }
                worst = worst.max((num / den).sqrt());
            }
            ok &= td.ledger.len() >= 100 && worst <= 1e-7;
            lines.push(format!(
                "{dae} vs {reduced} ({}) {worst:.1e}",
                mode.as_str()
            ));
        }
    }
    judge(ok, lines.join(", "))
}

fn variational() -> Outcome {
    let fine = SbpSet::new(&grid(401));
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let u = smooth_field(&mut rng, &fine);
    let mut ok = true;
    let mut lines = Vec::new();
    for (k, eig_tol) in [(1usize, 1e-3), (2, 1e-2)] {
        let e = SobolevEnergy::new(&fine, k);
        let cd = e.central_difference_check(&u, 1e-4, 50, DEFAULT_SEED);
        let eig = e.eigenfunction_error();
        ok &= cd <= 1e-8 && eig <= eig_tol;
        lines.push(format!(
            "order {k}: difference {cd:.1e}, eigenfunction {eig:.1e}"
        ));
    }
    let mut worst = 0.0f64;
    for kind in SystemKind::ALL {
        for mode in [BoundaryMode::Free, BoundaryMode::Clamped] {
            let desc = system(kind, &defaults(kind), 51, mode);
            let x = consistent_init(&desc, &smooth_state(&desc, &mut rng)).unwrap();
            worst =
                worst.max(variational_derivative_check(&desc, &x, 1e-4, 50, DEFAULT_SEED).unwrap());
        }
    }
    ok &= worst <= 1e-8;
    lines.push(format!("systems {worst:.1e}"));
    judge(ok, lines.join(", "))
}

/// `E^-1 A` restricted to the unknowns `keep`.
fn restricted_generator(desc: &PhDescriptor, keep: &[usize]) -> DMatrix<f64> {
    let m = keep.len();
    let a = desc.generator().select(keep, keep);
    let e = desc.descriptor_e().select(keep, keep);
    let a = DMatrix::from_row_slice(m, m, a.as_slice());
    let e = DMatrix::from_row_slice(m, m, e.as_slice());
    e.lu().solve(&a).expect("invertible E")
}

/// Overlap of the `mu`-eigenvector of `g` (by shifted inverse iteration)
/// with `target` on the coordinates `window`.
fn overlap(g: &DMatrix<f64>, mu: f64, window: std::ops::Range<usize>, target: &[f64]) -> f64 {
    let m = g.nrows();
    let shift = mu + 1e-7 * mu.abs().max(1.0);
    let lu = (g - DMatrix::identity(m, m) * shift).lu();
    let mut v = DMatrix::from_element(m, 1, 1.0);
    for _ in 0..3 {
        v = lu.solve(&v).expect("shifted solve");
        v /= v.norm();
    }
    let part: Vec<f64> = window.map(|i| v[i]).collect();
    let dot: f64 = part.iter().zip(target).map(|(a, b)| a * b).sum();
    let na = part.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nb = target.iter().map(|b| b * b).sum::<f64>().sqrt();
    (dot / (na * nb)).abs()
}

/// Eigenvalue of `g` closest to zero whose mode matches `target` on `window`.
fn fundamental(
    g: &DMatrix<f64>,
    candidates: &[f64],
    window: std::ops::Range<usize>,
    target: &[f64],
) -> Option<f64> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    sorted.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
    sorted
        .into_iter()
        .take(8)
        .find(|&mu| overlap(g, mu, window.clone(), target) > 0.99)
}

fn physical_oracles() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;

    // heat equation with homogeneous Dirichlet ends
    let n = 201;
    let mut p = ModelParams::defaults(ModelFamily::Dzektser);
    p.set("beta_s", 0.0).unwrap();
    p.set("eps_nl", 0.0).unwrap();
    let alpha = p.get("alpha_s").unwrap();
    let desc = system(SystemKind::DzektserExplicit, &p, n, BoundaryMode::Free);
    let keep: Vec<usize> = (1..n - 1).collect();
    let g = restricted_generator(&desc, &keep);
    let eig: Vec<f64> = g.complex_eigenvalues().iter().map(|c| c.re).collect();
    let nodes = grid(n).nodes().to_vec();
    let sine: Vec<f64> = keep.iter().map(|&i| (PI * nodes[i]).sin()).collect();
    let target = -alpha * PI * PI;
    match fundamental(&g, &eig, 0..n - 2, &sine) {
        Some(lambda) => {
            let rel = (lambda - target).abs() / target.abs();
            ok &= rel <= 0.01;
            lines.push(format!(
                "heat decay {lambda:.5} vs {target:.5} ({:.2}%)",
                100.0 * rel
            ));
        }
        None => {
            ok = false;
            lines.push("heat decay: no sin(pi x) mode".into());
        }
    }

    // simply supported beam without axial load: the discrete bending energy
    // with w pinned at both ends, whose natural condition is a free moment
    let n = 301;
    let mut p = ModelParams::defaults(ModelFamily::EulerBernoulli);
    p.set("T0", 0.0).unwrap();
    let ModelParams::Beam(b) = p else {
        unreachable!()
    };
    let rho_a = b.rho * b.a_sec;
    let target = b.e_mod * b.i_mom / rho_a * PI.powi(4);
    let sbp = SbpSet::new(&grid(n));
    let d = sbp.d1();
    let d2 = sbp.d_power(2);
    for kind in [SystemKind::EbImplicitReduced, SystemKind::EbExplicitReduced] {
        let desc = system(kind, &p, n, BoundaryMode::Free);
        let m = desc.hamiltonian_kernel();
        // bending energy as a quadratic form in w
        let kw = match kind {
            SystemKind::EbImplicitReduced => m.block(0, 0, n, n),
            _ => {
                let (me, mk) = (m.block(0, 0, n, n), m.block(n, n, n, n));
                d.transpose()
                    .matmul(&me)
                    .matmul(d)
                    .add(&d2.transpose().matmul(&mk).matmul(&d2))
            }
        };
        let keep: Vec<usize> = (1..n - 1).collect();
        let kw = kw.select(&keep, &keep);
        let size = keep.len();
        let mass: Vec<f64> = keep.iter().map(|&i| rho_a * sbp.norm()[i]).collect();
        let s = DMatrix::from_fn(size, size, |i, j| kw[(i, j)] / (mass[i] * mass[j]).sqrt());
        let omega2 = s
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let rel = (omega2 - target).abs() / target;
        ok &= rel <= 0.02;
        lines.push(format!(
            "{kind} omega^2 {omega2:.4} vs {target:.4} ({:.2}%)",
            100.0 * rel
        ));
    }
    judge(ok, lines.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("green identity for D^k, k = 1..4", green_identity),
        ("free-mode power balance", power_balance),
        ("clamped lossy energy decay", dissipativity),
        ("clamped lossless conservation", conservation),
        ("transformation identities", || transform_rows(false)),
        ("projector identity", || transform_rows(true)),
        ("commutative diagram", diagram),
        ("DAE and reduced beams agree", dae_reduced),
        ("variational derivatives", variational),
        ("heat decay and beam frequency oracles", physical_oracles),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let (verdict, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{verdict} [{}] {name} ({secs:.1}s): {detail}", i + 1);
        failed += usize::from(outcome.is_err());
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
