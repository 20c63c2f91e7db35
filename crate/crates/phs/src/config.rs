//! Scenario files: flat `key = value` lines with dotted section keys.
//!
//! ```text
//! model = timoshenko
//! representation = explicit
//! boundary_mode = free          # or clamped
//! grid.n_nodes = 101
//! time.t_final = 0.1
//! time.dt = 1e-3
//! params.T0 = 2.0
//! initial.kind = single_mode
//! ```
//!
//! The full schema is in the README.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use phs_core::models::{ModelFamily, ModelParams, Representation, SystemKind};
use phs_core::{BoundaryMode, Grid1D};

/// One problem with a scenario file, tied to the key that caused it.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(line: Option<usize>, field: &str, message: impl Into<String>) -> Self {
        Self {
            line,
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Zero,
    SingleMode {
        k: u32,
        amplitude: f64,
        field: Option<String>,
    },
    Gaussian {
        center: f64,
        width: f64,
        amplitude: f64,
        field: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outputs {
    pub trajectory: PathBuf,
    pub ledger: PathBuf,
}

#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub model: ModelFamily,
    pub representation: Representation,
    pub kind: SystemKind,
    pub params: ModelParams,
    pub grid: Grid1D,
    pub t_final: f64,
    /// `None` selects the system's default step.
    pub dt: Option<f64>,
    pub mode: BoundaryMode,
    pub initial: InitialCondition,
    pub outputs: Outputs,
    /// Relative ledger residual accepted by `simulate`.
    pub tolerance: f64,
}

const KNOWN: &[&str] = &[
    "model",
    "representation",
    "boundary_mode",
    "grid.x_left",
    "grid.x_right",
    "grid.n_nodes",
    "time.t_final",
    "time.dt",
    "initial.kind",
    "initial.k",
    "initial.amplitude",
    "initial.field",
    "initial.center",
    "initial.width",
    "output.trajectory",
    "output.ledger",
    "tolerance.residual",
];

struct Raw {
    entries: BTreeMap<String, (usize, String)>,
    errors: Vec<ConfigError>,
}

impl Raw {
    fn parse(text: &str) -> Self {
        let mut entries = BTreeMap::new();
        let mut errors = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                errors.push(ConfigError::new(
                    Some(lineno),
                    content,
                    "expected `key = value`",
                ));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                errors.push(ConfigError::new(
                    Some(lineno),
                    "<empty>",
                    "missing key before `=`",
                ));
                continue;
            }
            if !KNOWN.contains(&key) && !key.starts_with("params.") {
                errors.push(ConfigError::new(Some(lineno), key, "unknown key"));
                continue;
            }
            if let Some((first, _)) = entries.get(key) {
                errors.push(ConfigError::new(
                    Some(lineno),
                    key,
                    format!("duplicate key (first set on line {first})"),
                ));
                continue;
            }
            entries.insert(key.to_string(), (lineno, value.to_string()));
        }
        Self { entries, errors }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(l, _)| *l)
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn required(&mut self, key: &str) -> Option<String> {
        match self.text(key) {
            Some(v) => Some(v.to_string()),
            None => {
                self.errors
                    .push(ConfigError::new(None, key, "required key is missing"));
                None
            }
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let raw = self.text(key)?.to_string();
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                let line = self.line(key);
                self.errors.push(ConfigError::new(
                    line,
                    key,
                    format!("expected {what}, got `{raw}`"),
                ));
                None
            }
        }
    }

    fn real(&mut self, key: &str) -> Option<f64> {
        let v: f64 = self.parsed(key, "a number")?;
        if v.is_finite() {
            Some(v)
        } else {
            let line = self.line(key);
            self.errors
                .push(ConfigError::new(line, key, "value must be finite"));
            None
        }
    }

    fn real_or(&mut self, key: &str, default: f64) -> f64 {
        if self.text(key).is_some() {
            self.real(key).unwrap_or(default)
        } else {
            default
        }
    }

    fn fail(&mut self, key: &str, message: impl Into<String>) {
        let line = self.line(key);
        self.errors.push(ConfigError::new(line, key, message));
    }
}

/// Parses scenario text; relative output paths are resolved against `base`.
pub fn parse(text: &str, base: &Path) -> Result<ScenarioConfig, Vec<ConfigError>> {
    let mut raw = Raw::parse(text);

    let model = raw
        .required("model")
        .and_then(|m| match m.parse::<ModelFamily>() {
            Ok(v) => Some(v),
            Err(_) => {
                raw.fail(
                    "model",
                    format!("unknown model `{m}` (dzektser, nanorod, timoshenko, euler_bernoulli)"),
                );
                None
            }
        });
    let representation =
        raw.required("representation")
            .and_then(|r| match r.parse::<Representation>() {
                Ok(v) => Some(v),
                Err(_) => {
                    raw.fail("representation", format!("unknown representation `{r}`"));
                    None
                }
            });
    let kind = match (model, representation) {
        (Some(m), Some(r)) => match SystemKind::new(m, r) {
            Ok(k) => Some(k),
            Err(_) => {
                raw.fail(
                    "representation",
                    format!("representation {r:?} is not available for model {m:?}"),
                );
                None
            }
        },
        _ => None,
    };

    let mut params = model.map(ModelParams::defaults);
    let param_keys: Vec<String> = raw
        .entries
        .keys()
        .filter(|k| k.starts_with("params."))
        .cloned()
        .collect();
    for key in param_keys {
        let Some(value) = raw.real(&key) else {
            continue;
        };
        if let Some(p) = params.as_mut() {
            if p.set(&key["params.".len()..], value).is_err() {
                let known = p.keys().join(", ");
                raw.fail(
                    &key,
                    format!("unknown parameter for this model (known: {known})"),
                );
            }
        }
    }

    let mode = match raw.text("boundary_mode").map(str::to_string) {
        None => BoundaryMode::Free,
        Some(s) if s == "free" => BoundaryMode::Free,
        Some(s) if s == "clamped" => BoundaryMode::Clamped,
        Some(s) => {
            raw.fail(
                "boundary_mode",
                format!("expected `free` or `clamped`, got `{s}`"),
            );
            BoundaryMode::Free
        }
    };

    let x_left = raw.real_or("grid.x_left", 0.0);
    let x_right = raw.real_or("grid.x_right", 1.0);
    let n_nodes = if raw.required("grid.n_nodes").is_some() {
        raw.parsed::<usize>("grid.n_nodes", "a node count")
    } else {
        None
    };
    let grid = n_nodes.and_then(|n| match Grid1D::new(x_left, x_right, n) {
        Ok(g) => Some(g),
        Err(e) => {
            raw.fail("grid.n_nodes", format!("invalid grid: {e}"));
            None
        }
    });

    let t_final = if raw.required("time.t_final").is_some() {
        raw.real("time.t_final")
    } else {
        None
    };
    if let Some(t) = t_final {
        if t < 0.0 {
            raw.fail("time.t_final", "must be >= 0");
        }
    }
    let dt = if raw.text("time.dt").is_some() {
        let v = raw.real("time.dt");
        if let Some(d) = v {
            if d <= 0.0 {
                raw.fail("time.dt", format!("must be > 0, got {d}"));
            }
        }
        v
    } else {
        None
    };

    let field = raw.text("initial.field").map(str::to_string);
    let amplitude = raw.real_or("initial.amplitude", 1.0);
    let initial = match raw
        .text("initial.kind")
        .unwrap_or("single_mode")
        .to_string()
        .as_str()
    {
        "zero" => InitialCondition::Zero,
        "single_mode" => {
            let k = if raw.text("initial.k").is_some() {
                raw.parsed::<u32>("initial.k", "a positive integer")
                    .unwrap_or(1)
            } else {
                1
            };
            if k == 0 {
                raw.fail("initial.k", "mode number must be >= 1");
            }
            InitialCondition::SingleMode {
                k,
                amplitude,
                field,
            }
        }
        "gaussian" => {
            let center = raw.real_or("initial.center", 0.5 * (x_left + x_right));
            let width = raw.real_or("initial.width", 0.1 * (x_right - x_left).abs());
            if width <= 0.0 {
                raw.fail("initial.width", "must be > 0");
            }
            InitialCondition::Gaussian {
                center,
                width,
                amplitude,
                field,
            }
        }
        other => {
            raw.fail(
                "initial.kind",
                format!("unknown preset `{other}` (zero, single_mode, gaussian)"),
            );
            InitialCondition::Zero
        }
    };

    let path = |raw: &Raw, key: &str, default: &str| {
        let p = PathBuf::from(raw.text(key).unwrap_or(default));
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };
    let outputs = Outputs {
        trajectory: path(&raw, "output.trajectory", "trajectory.csv"),
        ledger: path(&raw, "output.ledger", "ledger.csv"),
    };
    let tolerance = raw.real_or("tolerance.residual", 1e-8);
    if tolerance <= 0.0 {
        raw.fail("tolerance.residual", "must be > 0");
    }

    if !raw.errors.is_empty() {
        raw.errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        return Err(raw.errors);
    }
    match (model, representation, kind, params, grid, t_final) {
        (
            Some(model),
            Some(representation),
            Some(kind),
            Some(params),
            Some(grid),
            Some(t_final),
        ) => Ok(ScenarioConfig {
            model,
            representation,
            kind,
            params,
            grid,
            t_final,
            dt,
            mode,
            initial,
            outputs,
            tolerance,
        }),
        _ => Err(vec![ConfigError::new(
            None,
            "<config>",
            "incomplete configuration",
        )]),
    }
}

/// Reads and parses a scenario file.
pub fn load(path: &Path) -> Result<ScenarioConfig, Vec<ConfigError>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        vec![ConfigError::new(
            None,
            "<file>",
            format!("cannot read {}: {e}", path.display()),
        )]
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse(&text, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "model = nanorod\nrepresentation = implicit\ngrid.n_nodes = 21\ntime.t_final = 0.01\n";

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse(MINIMAL, Path::new("/tmp")).unwrap();
        assert_eq!(c.kind, SystemKind::NanorodImplicit);
        assert_eq!(c.mode, BoundaryMode::Free);
        assert_eq!(c.dt, None);
        assert_eq!(c.outputs.ledger, PathBuf::from("/tmp/ledger.csv"));
    }

    #[test]
    fn every_problem_is_reported_with_its_key() {
        let text = "model = beam\nrepresentation = explicit\ngrid.n_nodes = x\ntime.t_final = 1\ntime.dt = -1\nbogus = 3\n";
        let errs = parse(text, Path::new(".")).unwrap_err();
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        for f in ["model", "grid.n_nodes", "time.dt", "bogus"] {
            assert!(fields.contains(&f), "{f} missing from {fields:?}");
        }
        assert_eq!(
            errs.iter().find(|e| e.field == "bogus").unwrap().line,
            Some(6)
        );
    }

    #[test]
    fn unknown_parameter_lists_known_ones() {
        let text = format!("{MINIMAL}params.T0 = 1\n");
        let errs = parse(&text, Path::new(".")).unwrap_err();
        assert!(errs[0].message.contains("tau_d"));
        assert_eq!(errs[0].line, Some(5));
    }
}
