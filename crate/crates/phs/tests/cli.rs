//! The `phs` binary: exit codes, diagnostics, outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use phs::matrix_io;

const SCENARIO: &str = "\
model = timoshenko
representation = implicit
boundary_mode = free
grid.n_nodes = 31
time.t_final = 0.02
time.dt = 0.002
initial.kind = gaussian
initial.field = w
";

fn phs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phs"))
        .args(args)
        .env_remove("PHS_TOL_MULTIPLIER")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", SCENARIO);
    let first = phs(&["simulate", &cfg]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let traj = fs::read(dir.path().join("trajectory.csv")).unwrap();
    let ledger = fs::read(dir.path().join("ledger.csv")).unwrap();
    let again = phs(&["simulate", &cfg]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("trajectory.csv")).unwrap(), traj);
    assert_eq!(fs::read(dir.path().join("ledger.csv")).unwrap(), ledger);

    let text = String::from_utf8(ledger).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,H,dH_dt,boundary_power,boundary_energy_rate,dissipation,residual"
    );
    assert_eq!(lines.count(), 10);
    let header = String::from_utf8(traj)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert!(header.starts_with("t,H,w[0],w[1]"));
    assert!(String::from_utf8_lossy(&first.stdout).contains("max relative balance residual"));
}

#[test]
fn output_paths_may_be_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SCENARIO}output.trajectory = a/t.csv\noutput.ledger = l.csv\n");
    fs::create_dir(dir.path().join("a")).unwrap();
    let cfg = write(dir.path(), "run.cfg", &text);
    assert_eq!(phs(&["simulate", &cfg]).status.code(), Some(0));
    assert!(dir.path().join("a/t.csv").exists());
    assert!(dir.path().join("l.csv").exists());
}

#[test]
fn invalid_config_exits_2_naming_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = SCENARIO.replace("grid.n_nodes = 31", "grid.n_nodes = many")
        + "params.rho = -1\nbogus = 3\n";
    let cfg = write(dir.path(), "bad.cfg", &text);
    let out = phs(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 4: grid.n_nodes"), "{err}");
    assert!(err.contains("line 10: bogus: unknown key"), "{err}");
    assert!(!dir.path().join("ledger.csv").exists());
}

#[test]
fn rejected_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.cfg",
        &format!("{SCENARIO}params.rho = -1\n"),
    );
    let out = phs(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("params"), "{}", stderr(&out));

    let cfg = write(
        dir.path(),
        "field.cfg",
        &SCENARIO.replace("initial.field = w", "initial.field = q"),
    );
    let out = phs(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("initial.field"));
}

#[test]
fn missing_config_file_exits_2() {
    let out = phs(&["simulate", "/nonexistent/run.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn residual_over_tolerance_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tight.cfg",
        &format!("{SCENARIO}tolerance.residual = 1e-300\n"),
    );
    let out = phs(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("exceeds tolerance"));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SCENARIO}output.ledger = missing/dir/l.csv\n");
    let cfg = write(dir.path(), "run.cfg", &text);
    assert_eq!(phs(&["simulate", &cfg]).status.code(), Some(4));

    let cfg = write(dir.path(), "ok.cfg", SCENARIO);
    let blocker = write(dir.path(), "file", "x");
    let out = phs(&["dump-operators", &cfg, &format!("{blocker}/sub")]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn dumps_read_back_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", SCENARIO);
    let out_dir = dir.path().join("ops");
    let out = phs(&["dump-operators", &cfg, out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let cfg = phs::config::load(Path::new(&cfg)).unwrap();
    let desc = phs::scenario::build(&cfg).unwrap();
    for expected in phs::scenario::operator_dumps(&desc) {
        let back = matrix_io::load(&out_dir.join(format!("{}.txt", expected.name))).unwrap();
        let bits =
            |m: &phs::core::Mat| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(back.name, expected.name);
        assert_eq!(bits(&back.mat), bits(&expected.mat), "{}", expected.name);
        assert_eq!(back.row_labels, expected.row_labels);
        assert_eq!(back.col_labels, expected.col_labels);
    }
    let j = matrix_io::load(&out_dir.join("J.txt")).unwrap();
    assert_eq!(j.mat.rows(), 4 * 31);
    assert_eq!(j.row_labels[31], "p_w[0]");
}

#[test]
fn verify_reports_seed_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("tables");
    let out = phs(&[
        "verify",
        "transforms",
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("seed = 7"));
    assert!(stdout.contains("draw,identity,residual,tolerance,passed"));
    assert!(stdout.contains("# suite transforms: PASS"));
    assert!(out_dir.join("transforms.csv").exists());
}

#[test]
fn verify_fails_with_named_identity_under_a_tiny_multiplier() {
    let out = Command::new(env!("CARGO_BIN_EXE_phs"))
        .args(["verify", "diagram"])
        .env("PHS_TOL_MULTIPLIER", "1e-12")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("FAIL [diagram] diagram"),
        "{}",
        stderr(&out)
    );

    let out = Command::new(env!("CARGO_BIN_EXE_phs"))
        .args(["verify", "diagram"])
        .env("PHS_TOL_MULTIPLIER", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_or_suite_exits_2() {
    assert_eq!(phs(&["verify", "everything"]).status.code(), Some(2));
    assert_eq!(phs(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(phs(&["--help"]).status.code(), Some(0));
}
