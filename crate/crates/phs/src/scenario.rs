//! Turning a [`ScenarioConfig`] into a system, initial data and outputs.

use std::path::Path;

use phs_core::integrator::{simulate_partial, Trajectory};
use phs_core::models::build_system;
use phs_core::{Error, Mat, PhDescriptor};

use crate::config::{ConfigError, InitialCondition, ScenarioConfig};
use crate::matrix_io::{self, LabeledMatrix};

/// Assembles the configured system. Parameter and structural problems are
/// reported against the `params` section.
pub fn build(cfg: &ScenarioConfig) -> Result<PhDescriptor, ConfigError> {
    build_system(cfg.kind, &cfg.params, &cfg.grid, cfg.mode).map_err(|e| match e {
        Error::Config(msg) => ConfigError::new(None, "params", msg),
        other => ConfigError::new(None, "params", other.to_string()),
    })
}

/// Initial profile on one field, zero elsewhere.
pub fn initial_state(cfg: &ScenarioConfig, desc: &PhDescriptor) -> Result<Vec<f64>, ConfigError> {
    let n = desc.nodes();
    let mut x = vec![0.0; desc.dim()];
    let (field, profile): (&Option<String>, Box<dyn Fn(f64) -> f64>) = match &cfg.initial {
        InitialCondition::Zero => return Ok(x),
        InitialCondition::SingleMode {
            k,
            amplitude,
            field,
        } => {
            let (a, len) = (cfg.grid.x_left(), cfg.grid.length());
            let (k, amp) = (*k as f64, *amplitude);
            (
                field,
                Box::new(move |s| amp * (k * std::f64::consts::PI * (s - a) / len).sin()),
            )
        }
        InitialCondition::Gaussian {
            center,
            width,
            amplitude,
            field,
        } => {
            let (c, w, amp) = (*center, *width, *amplitude);
            (
                field,
                Box::new(move |s| amp * (-((s - c) / w).powi(2)).exp()),
            )
        }
    };
    let index = match field {
        None => 0,
        Some(name) => desc
            .fields()
            .iter()
            .position(|f| &f.name == name)
            .ok_or_else(|| {
                let known: Vec<&str> = desc.fields().iter().map(|f| f.name.as_str()).collect();
                ConfigError::new(
                    None,
                    "initial.field",
                    format!(
                        "no field `{name}` in {} (fields: {})",
                        desc.name(),
                        known.join(", ")
                    ),
                )
            })?,
    };
    for (slot, &s) in x[index * n..(index + 1) * n]
        .iter_mut()
        .zip(cfg.grid.nodes())
    {
        *slot = profile(s);
    }
    Ok(x)
}

pub struct RunOutcome {
    pub desc: PhDescriptor,
    pub trajectory: Trajectory,
    pub failure: Option<Error>,
    pub dt: f64,
}

impl RunOutcome {
    pub fn max_residual(&self) -> f64 {
        self.trajectory.ledger.max_relative_residual()
    }
}

pub fn run(cfg: &ScenarioConfig) -> Result<RunOutcome, ConfigError> {
    let desc = build(cfg)?;
    let x0 = initial_state(cfg, &desc)?;
    let dt = cfg.dt.unwrap_or_else(|| desc.default_dt());
    let (trajectory, failure) = simulate_partial(&desc, &x0, cfg.t_final, dt);
    Ok(RunOutcome {
        desc,
        trajectory,
        failure,
        dt,
    })
}

fn unknown_labels(desc: &PhDescriptor) -> Vec<String> {
    let mut out = Vec::with_capacity(desc.dim());
    for f in desc.fields() {
        out.extend((0..desc.nodes()).map(|i| format!("{}[{i}]", f.name)));
    }
    out
}

/// The operators written by `dump-operators`.
pub fn operator_dumps(desc: &PhDescriptor) -> Vec<LabeledMatrix> {
    let labels = unknown_labels(desc);
    let square = |name: &str, mat: &Mat| LabeledMatrix {
        name: name.into(),
        mat: mat.clone(),
        row_labels: labels.clone(),
        col_labels: labels.clone(),
    };
    let parts = desc.parts();
    let mut out = vec![
        square("E", desc.descriptor_e()),
        square("S", &parts.lagrange_s),
        square("P", &parts.lagrange_p),
        square("Q", desc.effort_map()),
        square("M", desc.hamiltonian_kernel()),
    ];
    // J acts on storage and resistive efforts together
    let n = desc.nodes();
    let mut j_labels = labels.clone();
    for f in &parts.resistive_fields {
        j_labels.extend((0..n).map(|i| format!("{}[{i}]", f.name)));
    }
    out.insert(
        1,
        LabeledMatrix {
            name: "J".into(),
            mat: desc.structure_mat().clone(),
            row_labels: j_labels.clone(),
            col_labels: j_labels,
        },
    );
    if let Some(k) = &parts.resistive_closure {
        let rl: Vec<String> = parts
            .resistive_fields
            .iter()
            .flat_map(|f| (0..n).map(move |i| format!("{}[{i}]", f.name)))
            .collect();
        out.push(LabeledMatrix {
            name: "K".into(),
            mat: k.clone(),
            row_labels: rl.clone(),
            col_labels: rl,
        });
    }
    out.push(port_matrix(desc));
    out
}

/// Endpoint trace operators: row `left`/`right` picks the first/last node
/// of every field, so port values are `ports * x` field by field.
fn port_matrix(desc: &PhDescriptor) -> LabeledMatrix {
    let (n, nf) = (desc.nodes(), desc.fields().len());
    let mut mat = Mat::zeros(2 * nf, desc.dim());
    let mut row_labels = Vec::with_capacity(2 * nf);
    for (k, f) in desc.fields().iter().enumerate() {
        mat[(2 * k, k * n)] = 1.0;
        mat[(2 * k + 1, k * n + n - 1)] = 1.0;
        row_labels.push(format!("{}@left", f.name));
        row_labels.push(format!("{}@right", f.name));
    }
    LabeledMatrix {
        name: "ports".into(),
        mat,
        row_labels,
        col_labels: unknown_labels(desc),
    }
}

pub fn dump_operators(desc: &PhDescriptor, dir: &Path) -> std::io::Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for m in operator_dumps(desc) {
        let path = dir.join(format!("{}.txt", m.name));
        matrix_io::save(&path, &m)?;
        written.push(path);
    }
    Ok(written)
}
