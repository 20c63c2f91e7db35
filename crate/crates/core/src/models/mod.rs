//! Constructors for the shipped systems.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::blockop::{block_norm, BlockOp};
use crate::descriptor::{BoundaryMode, EndPorts, EnergyPairing, PhDescriptor, PortSample};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::sbp::{Grid1D, SbpSet};

mod beam;
mod dzektser;
mod nanorod;

pub use beam::{
    eb_explicit_dae, eb_explicit_reduced, eb_implicit_dae, eb_implicit_reduced, g_reduced,
    g_timoshenko, structure_canonical, structure_eb_reduced_explicit,
    structure_timoshenko_explicit, timoshenko_explicit, timoshenko_implicit, BeamCoefficients,
    BeamParams,
};
pub use dzektser::{dzektser_explicit, DzektserParams};
pub use nanorod::{
    nanorod_explicit, nanorod_explicit_parts, nanorod_implicit, nanorod_implicit_parts,
    NanorodParams,
};

/// Which physical model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    Dzektser,
    Nanorod,
    Timoshenko,
    EulerBernoulli,
}

impl FromStr for ModelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dzektser" => Ok(Self::Dzektser),
            "nanorod" => Ok(Self::Nanorod),
            "timoshenko" => Ok(Self::Timoshenko),
            "euler_bernoulli" => Ok(Self::EulerBernoulli),
            other => Err(Error::Config(format!("model: unknown model `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Representation {
    Explicit,
    Implicit,
    ExplicitDae,
    ImplicitDae,
    ExplicitReduced,
    ImplicitReduced,
}

impl FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Self::Explicit),
            "implicit" => Ok(Self::Implicit),
            "explicit_dae" => Ok(Self::ExplicitDae),
            "implicit_dae" => Ok(Self::ImplicitDae),
            "explicit_reduced" => Ok(Self::ExplicitReduced),
            "implicit_reduced" => Ok(Self::ImplicitReduced),
            other => Err(Error::Config(format!(
                "representation: unknown representation `{other}`"
            ))),
        }
    }
}

/// One concrete system: a model in one representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemKind {
    DzektserExplicit,
    NanorodExplicit,
    NanorodImplicit,
    TimoshenkoExplicit,
    TimoshenkoImplicit,
    EbExplicitDae,
    EbExplicitReduced,
    EbImplicitDae,
    EbImplicitReduced,
}

impl SystemKind {
    pub const ALL: [SystemKind; 9] = [
        SystemKind::DzektserExplicit,
        SystemKind::NanorodExplicit,
        SystemKind::NanorodImplicit,
        SystemKind::TimoshenkoExplicit,
        SystemKind::TimoshenkoImplicit,
        SystemKind::EbExplicitDae,
        SystemKind::EbExplicitReduced,
        SystemKind::EbImplicitDae,
        SystemKind::EbImplicitReduced,
    ];

    pub fn new(model: ModelFamily, repr: Representation) -> Result<Self> {
        use ModelFamily as M;
        use Representation as R;
        Ok(match (model, repr) {
            (M::Dzektser, R::Explicit) => Self::DzektserExplicit,
            (M::Nanorod, R::Explicit) => Self::NanorodExplicit,
            (M::Nanorod, R::Implicit) => Self::NanorodImplicit,
            (M::Timoshenko, R::Explicit) => Self::TimoshenkoExplicit,
            (M::Timoshenko, R::Implicit) => Self::TimoshenkoImplicit,
            (M::EulerBernoulli, R::ExplicitDae) => Self::EbExplicitDae,
            (M::EulerBernoulli, R::ExplicitReduced) => Self::EbExplicitReduced,
            (M::EulerBernoulli, R::ImplicitDae) => Self::EbImplicitDae,
            (M::EulerBernoulli, R::ImplicitReduced) => Self::EbImplicitReduced,
            (m, r) => {
                return Err(Error::Config(format!(
                    "representation: {r:?} is not available for model {m:?}"
                )))
            }
        })
    }

    pub fn family(self) -> ModelFamily {
        match self {
            Self::DzektserExplicit => ModelFamily::Dzektser,
            Self::NanorodExplicit | Self::NanorodImplicit => ModelFamily::Nanorod,
            Self::TimoshenkoExplicit | Self::TimoshenkoImplicit => ModelFamily::Timoshenko,
            _ => ModelFamily::EulerBernoulli,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::DzektserExplicit => "dzektser_explicit",
            Self::NanorodExplicit => "nanorod_explicit",
            Self::NanorodImplicit => "nanorod_implicit",
            Self::TimoshenkoExplicit => "timoshenko_explicit",
            Self::TimoshenkoImplicit => "timoshenko_implicit",
            Self::EbExplicitDae => "eb_explicit_dae",
            Self::EbExplicitReduced => "eb_explicit_reduced",
            Self::EbImplicitDae => "eb_implicit_dae",
            Self::EbImplicitReduced => "eb_implicit_reduced",
        }
    }

    /// True when the model has no resistive element.
    pub fn is_lossless(self) -> bool {
        !matches!(
            self,
            Self::DzektserExplicit | Self::NanorodExplicit | Self::NanorodImplicit
        )
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of any family.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelParams {
    Dzektser(DzektserParams),
    Nanorod(NanorodParams),
    Beam(BeamParams),
}

impl ModelParams {
    pub fn defaults(family: ModelFamily) -> Self {
        match family {
            ModelFamily::Dzektser => Self::Dzektser(DzektserParams::default()),
            ModelFamily::Nanorod => Self::Nanorod(NanorodParams::default()),
            ModelFamily::Timoshenko | ModelFamily::EulerBernoulli => {
                Self::Beam(BeamParams::default())
            }
        }
    }

    /// Configuration keys of this family, in declaration order.
    pub fn keys(&self) -> &'static [&'static str] {
        match self {
            Self::Dzektser(_) => &["alpha_s", "beta_s", "eps_nl"],
            Self::Nanorod(_) => &["k_f", "rhoA", "mu_nl", "E_mod", "A_sec", "b_damp", "tau_d"],
            Self::Beam(_) => &["rho", "A_sec", "I_mom", "E_mod", "T0", "kappaG"],
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        let mut copy = self.clone();
        let slot = match &mut copy {
            Self::Dzektser(p) => p.slot(key),
            Self::Nanorod(p) => p.slot(key),
            Self::Beam(p) => p.slot(key),
        };
        slot.map(|s| *s)
    }

    /// Overrides one parameter by its configuration key.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match self {
            Self::Dzektser(p) => p.slot(key),
            Self::Nanorod(p) => p.slot(key),
            Self::Beam(p) => p.slot(key),
        };
        match slot {
            Some(s) => {
                *s = value;
                Ok(())
            }
            None => Err(Error::Config(format!("params.{key}: unknown parameter"))),
        }
    }
}

/// Builds any system by kind.
pub fn build_system(
    kind: SystemKind,
    params: &ModelParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<PhDescriptor> {
    let mismatch = || Error::Config(format!("params: wrong parameter family for {kind}"));
    match (kind, params) {
        (SystemKind::DzektserExplicit, ModelParams::Dzektser(p)) => {
            dzektser_explicit(p, grid, mode)
        }
        (SystemKind::NanorodExplicit, ModelParams::Nanorod(p)) => nanorod_explicit(p, grid, mode),
        (SystemKind::NanorodImplicit, ModelParams::Nanorod(p)) => nanorod_implicit(p, grid, mode),
        (SystemKind::TimoshenkoExplicit, ModelParams::Beam(p)) => {
            timoshenko_explicit(p, grid, mode)
        }
        (SystemKind::TimoshenkoImplicit, ModelParams::Beam(p)) => {
            timoshenko_implicit(p, grid, mode)
        }
        (SystemKind::EbExplicitDae, ModelParams::Beam(p)) => eb_explicit_dae(p, grid, mode),
        (SystemKind::EbExplicitReduced, ModelParams::Beam(p)) => eb_explicit_reduced(p, grid, mode),
        (SystemKind::EbImplicitDae, ModelParams::Beam(p)) => eb_implicit_dae(p, grid, mode),
        (SystemKind::EbImplicitReduced, ModelParams::Beam(p)) => eb_implicit_reduced(p, grid, mode),
        _ => Err(mismatch()),
    }
}

pub(crate) fn require(name: &str, value: f64, positive: bool) -> Result<()> {
    let ok = value.is_finite() && if positive { value > 0.0 } else { value >= 0.0 };
    if ok {
        Ok(())
    } else {
        let rel = if positive { "> 0" } else { ">= 0" };
        Err(Error::Config(format!(
            "params.{name}: must be finite and {rel}, got {value}"
        )))
    }
}

/// Slice of field `k` in a stacked nodal vector.
pub(crate) fn field(x: &[f64], k: usize, n: usize) -> &[f64] {
    &x[k * n..(k + 1) * n]
}

pub(crate) fn labels(names: &[(&str, &str)]) -> Vec<crate::descriptor::FieldLabel> {
    names
        .iter()
        .map(|(n, u)| crate::descriptor::FieldLabel::new(n, u))
        .collect()
}

/// Global indices of `nodes` within each of `fields`.
pub(crate) fn fixed_at(fields: &[usize], nodes: &[usize], n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = fields
        .iter()
        .flat_map(|&f| nodes.iter().map(move |&i| f * n + i))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub(crate) fn ends(n: usize) -> Vec<usize> {
    vec![0, n - 1]
}

pub(crate) fn two_layers(n: usize) -> Vec<usize> {
    let mut v = vec![0, 1, n - 2, n - 1];
    v.dedup();
    v
}

pub(crate) fn fixed_if(mode: BoundaryMode, idx: Vec<usize>) -> Vec<usize> {
    match mode {
        BoundaryMode::Free => Vec::new(),
        BoundaryMode::Clamped => idx,
    }
}

/// `K^T H_c K` for a block operator `K` and per-row-block coefficients `c`.
pub(crate) fn weighted_gram(sbp: &SbpSet, k: &BlockOp, coeffs: &[f64]) -> Mat {
    let n = sbp.len();
    let km = k.to_mat(sbp);
    let mut w = Vec::with_capacity(coeffs.len() * n);
    for (&c, h) in coeffs.iter().zip(core::iter::repeat(sbp.norm())) {
        w.extend(h.iter().map(|x| x * c));
    }
    let ones = vec![1.0; km.cols()];
    km.transpose().matmul(&km.scale_rows_cols(&w, &ones))
}

/// `H` times a matrix, field by field.
pub(crate) fn h_times(sbp: &SbpSet, fields: usize, m: &Mat) -> Mat {
    let h = block_norm(sbp, fields);
    let ones = vec![1.0; m.cols()];
    m.scale_rows_cols(&h, &ones)
}

/// Collects endpoint values of nodal port vectors.
pub(crate) struct PortVectors {
    pub flow: Vec<Vec<f64>>,
    pub effort: Vec<Vec<f64>>,
    pub chi: Vec<Vec<f64>>,
    pub eps: Vec<Vec<f64>>,
    pub chi_rate: Vec<Vec<f64>>,
    pub eps_rate: Vec<Vec<f64>>,
    pub pairing: EnergyPairing,
}

impl PortVectors {
    pub fn sample(&self) -> PortSample {
        let at = |vs: &[Vec<f64>], i: fn(&[f64]) -> f64| -> Vec<f64> {
            vs.iter().map(|v| i(v)).collect()
        };
        let first = |v: &[f64]| v[0];
        let last = |v: &[f64]| v[v.len() - 1];
        let end = |i: fn(&[f64]) -> f64| EndPorts {
            flow: at(&self.flow, i),
            effort: at(&self.effort, i),
            chi: at(&self.chi, i),
            eps: at(&self.eps, i),
            chi_rate: at(&self.chi_rate, i),
            eps_rate: at(&self.eps_rate, i),
        };
        PortSample {
            left: end(first),
            right: end(last),
            pairing: self.pairing,
        }
    }
}

pub(crate) fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

pub(crate) fn name_of(kind: &str, mode: BoundaryMode) -> String {
    format!("{kind} ({})", mode.as_str())
}
