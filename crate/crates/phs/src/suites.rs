//! Verification suites run by `phs verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phs_core::audit::{
    certify, smooth_field, smooth_state, variational_derivative_check, SobolevEnergy,
};
use phs_core::integrator::consistent_init;
use phs_core::models::{build_system, BeamParams, ModelParams, SystemKind};
use phs_core::transforms::{
    admissible_state, build_g_timoshenko, verify_diagram, verify_transforms, DIAGRAM_COLUMNS,
};
use phs_core::{BoundaryMode, Grid1D, SbpSet};

use crate::table::{fmt_f64, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Structure,
    Transforms,
    Diagram,
    Variational,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Structure => "structure",
            Suite::Transforms => "transforms",
            Suite::Diagram => "diagram",
            Suite::Variational => "variational",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Multiplies every tolerance.
    pub tol_mult: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub tables: Vec<Table>,
    /// One line per failed identity, naming it.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Factors applied to every default parameter in the structure sweep.
pub const SWEEP: [f64; 3] = [1.0, 0.5, 2.0];

const MODES: [BoundaryMode; 2] = [BoundaryMode::Free, BoundaryMode::Clamped];

pub fn run(suite: Suite, opts: VerifyOptions) -> Vec<SuiteReport> {
    match suite {
        Suite::Structure => vec![structure(opts)],
        Suite::Transforms => vec![transforms(opts)],
        Suite::Diagram => vec![diagram(opts)],
        Suite::Variational => vec![variational(opts)],
        Suite::All => std::thread::scope(|s| {
            let handles =
                [structure, transforms, diagram, variational].map(|f| s.spawn(move || f(opts)));
            handles
                .into_iter()
                .map(|h| h.join().expect("suite thread panicked"))
                .collect()
        }),
    }
}

fn scaled_defaults(kind: SystemKind, factor: f64) -> ModelParams {
    let mut p = ModelParams::defaults(kind.family());
    for key in p.keys() {
        let v = p.get(key).expect("listed key");
        p.set(key, v * factor).expect("listed key");
    }
    p
}

fn grid(n: usize) -> Grid1D {
    Grid1D::new(0.0, 1.0, n).expect("static grid")
}

fn verdict(passed: bool) -> String {
    if passed { "PASS" } else { "FAIL" }.into()
}

pub fn structure(opts: VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport {
        suite: "structure",
        ..Default::default()
    };
    let mut t = Table::new(
        "structure",
        &[
            "system",
            "scale",
            "check",
            "residual",
            "tolerance",
            "passed",
        ],
    );
    let g = grid(41);
    for kind in SystemKind::ALL {
        for mode in MODES {
            for factor in SWEEP {
                let params = scaled_defaults(kind, factor);
                let desc = match build_system(kind, &params, &g, mode) {
                    Ok(d) => d,
                    Err(e) => {
                        report.failures.push(format!(
                            "{kind} ({}) x{factor}: assembly: {e}",
                            mode.as_str()
                        ));
                        continue;
                    }
                };
                for e in certify(&desc, opts.seed).entries {
                    let tol = e.tolerance * opts.tol_mult;
                    let ok = e.residual.is_finite() && e.residual <= tol;
                    if !ok {
                        report.failures.push(format!(
                            "{} x{factor}: {} residual {:e} > {:e} ({})",
                            desc.name(),
                            e.name,
                            e.residual,
                            tol,
                            e.detail
                        ));
                    }
                    t.push(vec![
                        desc.name().into(),
                        fmt_f64(factor),
                        e.name,
                        fmt_f64(e.residual),
                        fmt_f64(tol),
                        verdict(ok),
                    ]);
                }
            }
        }
    }
    report.tables.push(t);
    report
}

/// Beam parameters drawn uniformly from `[0.1, 10]`.
pub fn beam_draw(rng: &mut ChaCha8Rng) -> BeamParams {
    let mut d = || rng.gen_range(0.1..10.0);
    BeamParams {
        rho: d(),
        a_sec: d(),
        i_mom: d(),
        e_mod: d(),
        t0: d(),
        kappa_g: d(),
    }
}

pub fn transforms(opts: VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport {
        suite: "transforms",
        ..Default::default()
    };
    let mut t = Table::new(
        "transforms",
        &["draw", "identity", "residual", "tolerance", "passed"],
    );
    let g = grid(101);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut check = |t: &mut Table, draw: &str, name: &str, r: f64, tol: f64| {
        let tol = tol * opts.tol_mult;
        let ok = r.is_finite() && r <= tol;
        if !ok {
            report
                .failures
                .push(format!("draw {draw}: {name} residual {r:e} > {tol:e}"));
        }
        t.push(vec![
            draw.into(),
            name.into(),
            fmt_f64(r),
            fmt_f64(tol),
            verdict(ok),
        ]);
    };
    for draw in 0..3 {
        let params = if draw == 0 {
            BeamParams::default()
        } else {
            beam_draw(&mut rng)
        };
        match verify_transforms(&params, &g) {
            Ok(r) => {
                for (name, res, tol) in r.rows() {
                    check(&mut t, &draw.to_string(), name, res, tol);
                }
            }
            Err(e) => check(
                &mut t,
                &draw.to_string(),
                &format!("assembly: {e}"),
                f64::INFINITY,
                0.0,
            ),
        }
    }
    let gt = build_g_timoshenko(&g).expect("static grid");
    let n = g.len();
    let (mut left, mut right, mut cov) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let z: Vec<f64> = (0..4 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e: Vec<f64> = (0..5 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        left = left.max(gt.left_round_trip(&z).unwrap_or(f64::INFINITY));
        let y = gt.apply(&z).expect("sized");
        right = right.max(gt.right_round_trip(&y).unwrap_or(f64::INFINITY));
        cov = cov.max(gt.effort_covariance(&z, &e).unwrap_or(f64::INFINITY));
    }
    check(&mut t, "random", "F G = I on mean-zero states", left, 1e-9);
    check(&mut t, "random", "G F = I on range(G)", right, 1e-9);
    check(&mut t, "random", "effort covariance", cov, 1e-11);
    report.tables.push(t);
    report
}

pub const DIAGRAM_TOL: f64 = 1e-7;

pub fn diagram(opts: VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport {
        suite: "diagram",
        ..Default::default()
    };
    let mut header = vec!["t"];
    header.extend(DIAGRAM_COLUMNS);
    let mut t = Table::new("diagram", &header);
    let g = grid(101);
    let sbp = SbpSet::new(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let w = smooth_field(&mut rng, &sbp);
    let p = smooth_field(&mut rng, &sbp);
    let z0 = admissible_state(&g, &w, &p, &vec![0.0; g.len()]);
    match verify_diagram(&BeamParams::default(), &g, &z0, 50.0 * 1e-3, 1e-3) {
        Ok(d) => {
            for (time, row) in d.times.iter().zip(&d.rows) {
                let mut cells = vec![fmt_f64(*time)];
                cells.extend(row.iter().map(|&v| fmt_f64(v)));
                t.push(cells);
            }
            let tol = DIAGRAM_TOL * opts.tol_mult;
            for (c, name) in DIAGRAM_COLUMNS.iter().enumerate() {
                let m = d.column_max(c);
                if m.is_nan() || m > tol {
                    report
                        .failures
                        .push(format!("diagram {name}: discrepancy {m:e} > {tol:e}"));
                }
            }
        }
        Err(e) => report.failures.push(format!("diagram: {e}")),
    }
    report.tables.push(t);
    report
}

pub fn variational(opts: VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport {
        suite: "variational",
        ..Default::default()
    };
    let mut t = Table::new(
        "variational",
        &["target", "check", "residual", "tolerance", "passed"],
    );
    let mut record = |t: &mut Table, target: &str, name: &str, r: f64, tol: f64| {
        let tol = tol * opts.tol_mult;
        let ok = r.is_finite() && r <= tol;
        if !ok {
            report
                .failures
                .push(format!("{target}: {name} residual {r:e} > {tol:e}"));
        }
        t.push(vec![
            target.into(),
            name.into(),
            fmt_f64(r),
            fmt_f64(tol),
            verdict(ok),
        ]);
    };
    let fine = SbpSet::new(&grid(401));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let u = smooth_field(&mut rng, &fine);
    for (k, eig_tol) in [(1usize, 1e-3), (2, 1e-2)] {
        let e = SobolevEnergy::new(&fine, k);
        let target = format!("H{k}");
        record(
            &mut t,
            &target,
            "central difference",
            e.central_difference_check(&u, 1e-4, 50, opts.seed),
            1e-8,
        );
        record(
            &mut t,
            &target,
            "sin(pi x) eigenfunction",
            e.eigenfunction_error(),
            eig_tol,
        );
    }
    let g = grid(51);
    for kind in SystemKind::ALL {
        for mode in MODES {
            let params = ModelParams::defaults(kind.family());
            let Ok(desc) = build_system(kind, &params, &g, mode) else {
                record(&mut t, kind.name(), "assembly", f64::INFINITY, 0.0);
                continue;
            };
            let mut worst = 0.0f64;
            for s in 0..5 {
                let x = consistent_init(&desc, &smooth_state(&desc, &mut rng))
                    .and_then(|x| variational_derivative_check(&desc, &x, 1e-4, 20, opts.seed + s));
                worst = worst.max(x.unwrap_or(f64::INFINITY));
            }
            record(
                &mut t,
                desc.name(),
                "Lagrange form vs central difference",
                worst,
                1e-8,
            );
        }
    }
    report.tables.push(t);
    report
}
