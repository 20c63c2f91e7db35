//! Semi-discrete port-Hamiltonian systems in descriptor form.
//!
//! A system is stored as
//!
//! ```text
//!   E x' = (J_ss - R) e + J_sr e_r,   f_r = J_rs e,   e_r = K f_r,   e = Q x
//! ```
//!
//! where `x` is the integration variable, `e` the storage efforts and
//! `(f_r, e_r)` the resistive ports. The energy is `1/2 x^T M x` with `M`
//! the `H`-weighted Hamiltonian kernel; `M` must equal the Lagrange kernel
//! `H P^T S` plus an explicit endpoint correction.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::blockop::{block_norm, BlockOp};
use crate::error::{Error, Result};
use crate::linalg::{dot, Lu, Mat};
use crate::sbp::SbpSet;

/// How homogeneous boundary conditions are imposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    /// Every node evolves; boundary ports are generally nonzero.
    Free,
    /// Selected endpoint unknowns are removed from the system.
    Clamped,
}

impl BoundaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMode::Free => "free",
            BoundaryMode::Clamped => "clamped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldLabel {
    pub name: String,
    pub unit: String,
}

impl FieldLabel {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// How an energy port enters the balance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyPairing {
    /// `[d/dt(chi) . eps]`
    ChiRate,
    /// `[chi . d/dt(eps)]`
    EpsRate,
}

/// Port values at one endpoint.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EndPorts {
    pub flow: Vec<f64>,
    pub effort: Vec<f64>,
    pub chi: Vec<f64>,
    pub eps: Vec<f64>,
    pub chi_rate: Vec<f64>,
    pub eps_rate: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PortSample {
    pub left: EndPorts,
    pub right: EndPorts,
    pub pairing: EnergyPairing,
}

impl PortSample {
    /// `[f . e]` from left to right.
    pub fn power(&self) -> f64 {
        dot(&self.right.flow, &self.right.effort) - dot(&self.left.flow, &self.left.effort)
    }

    pub fn energy_rate(&self) -> f64 {
        let end = |p: &EndPorts| match self.pairing {
            EnergyPairing::ChiRate => dot(&p.chi_rate, &p.eps),
            EnergyPairing::EpsRate => dot(&p.chi, &p.eps_rate),
        };
        end(&self.right) - end(&self.left)
    }

    pub fn is_zero(&self) -> bool {
        [&self.left, &self.right].iter().all(|p| {
            [&p.flow, &p.effort, &p.chi, &p.eps, &p.chi_rate, &p.eps_rate]
                .iter()
                .all(|v| v.iter().all(|&x| x == 0.0))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermKind {
    Boundary,
    Dissipation,
}

/// One named monomial of a power balance, already evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct BalanceTerm {
    pub name: &'static str,
    pub kind: TermKind,
    pub value: f64,
}

/// Model-specific boundary readouts.
///
/// `ports` and `dissipation` feed the integrator ledger. `balance_terms`
/// restates each power-balance monomial directly from fields and is used
/// by the audit as a second, independent evaluation.
pub trait PortModel: Send + Sync {
    fn ports(&self, x: &[f64], rate: &[f64]) -> PortSample;
    fn dissipation(&self, x: &[f64]) -> f64;
    fn balance_terms(&self, x: &[f64], rate: &[f64]) -> Vec<BalanceTerm>;
}

/// Raw blocks handed to [`PhDescriptor::assemble`].
#[derive(Clone)]
pub struct DescriptorParts {
    pub name: String,
    pub sbp: SbpSet,
    pub mode: BoundaryMode,
    pub fields: Vec<FieldLabel>,
    pub resistive_fields: Vec<FieldLabel>,
    pub descriptor_e: Mat,
    /// Structure on `(e, e_r)`; square with `fields + resistive_fields` blocks.
    pub structure_j: BlockOp,
    /// Folded diagonal dissipation, one coefficient per storage field.
    pub dissipation_r: Vec<f64>,
    /// `K = R_L^-1 R_R`, so that `e_r = K f_r`.
    pub resistive_closure: Option<Mat>,
    /// `H`-weighted `R_L† R_R` including its boundary terms; must be PSD.
    pub resistive_gram: Option<Mat>,
    pub effort_map: Mat,
    pub lagrange_s: Mat,
    pub lagrange_p: Mat,
    pub lagrange_kernel: Mat,
    pub boundary_correction: Mat,
    pub hamiltonian: Mat,
    /// Physical state `z = state_map x` when it differs from `x`.
    pub state_map: Option<Mat>,
    pub fixed: Vec<usize>,
    pub default_dt: f64,
    pub ports: Arc<dyn PortModel>,
    /// Projection onto the constraint manifold for systems whose hidden
    /// constraints the generic index-1 initialization cannot see.
    pub initializer: Option<Initializer>,
}

pub type Initializer = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

impl fmt::Debug for DescriptorParts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DescriptorParts")
            .field("name", &self.name)
            .field("mode", &self.mode)
            .field("fields", &self.fields.len())
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureCheck {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl StructureCheck {
    fn new(name: &'static str, residual: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            residual,
            tolerance,
            passed: residual <= tolerance,
            detail,
        }
    }
}

pub const STRUCTURE_TOL: f64 = 1e-11;

/// A validated, immutable system.
#[derive(Clone, Debug)]
pub struct PhDescriptor {
    parts: DescriptorParts,
    structure_mat: Mat,
    generator: Mat,
    state_lu: Option<Arc<Lu>>,
}

impl PhDescriptor {
    /// Validates dimensions and runs every structural check.
    pub fn assemble(parts: DescriptorParts) -> Result<Self> {
        let desc = Self::assemble_unchecked(parts)?;
        for check in desc.structure_checks() {
            if !check.passed {
                return Err(Error::Structure {
                    check: check.name,
                    residual: check.residual,
                    tolerance: check.tolerance,
                    detail: check.detail,
                });
            }
        }
        Ok(desc)
    }

    /// Dimension validation only. Used to certify deliberately broken systems.
    pub fn assemble_unchecked(parts: DescriptorParts) -> Result<Self> {
        let n = parts.sbp.len();
        let nf = parts.fields.len();
        let nr = parts.resistive_fields.len();
        if nf == 0 {
            return Err(Error::Dimension {
                expected: 1,
                got: 0,
                context: "storage fields",
            });
        }
        let dim = nf * n;
        let square = |m: &Mat, context: &'static str| -> Result<()> {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: if m.rows() != dim { m.rows() } else { m.cols() },
                    context,
                });
            }
            Ok(())
        };
        square(&parts.descriptor_e, "descriptor E")?;
        square(&parts.effort_map, "effort map")?;
        square(&parts.lagrange_s, "Lagrange S")?;
        square(&parts.lagrange_p, "Lagrange P")?;
        square(&parts.lagrange_kernel, "Lagrange kernel")?;
        square(&parts.boundary_correction, "boundary correction")?;
        square(&parts.hamiltonian, "Hamiltonian kernel")?;
        if let Some(p) = &parts.state_map {
            square(p, "state map")?;
        }
        let blocks = parts.structure_j.block_rows();
        if blocks != nf + nr || parts.structure_j.block_cols() != nf + nr {
            return Err(Error::Dimension {
                expected: nf + nr,
                got: blocks,
                context: "structure J blocks",
            });
        }
        if parts.dissipation_r.len() != nf {
            return Err(Error::Dimension {
                expected: nf,
                got: parts.dissipation_r.len(),
                context: "folded dissipation",
            });
        }
        match (&parts.resistive_closure, nr) {
            (None, 0) => {}
            (Some(k), _) if k.rows() == nr * n && k.cols() == nr * n => {}
            (k, _) => {
                return Err(Error::Dimension {
                    expected: nr * n,
                    got: k.as_ref().map_or(0, Mat::rows),
                    context: "resistive closure",
                })
            }
        }
        if let Some(&bad) = parts.fixed.iter().find(|&&i| i >= dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: bad,
                context: "fixed degree of freedom",
            });
        }
        if !(parts.default_dt.is_finite() && parts.default_dt > 0.0) {
            return Err(Error::Config(format!(
                "default time step must be positive, got {}",
                parts.default_dt
            )));
        }

        let structure_mat = parts.structure_j.to_mat(&parts.sbp);
        let jss = structure_mat.block(0, 0, dim, dim);
        let mut op = jss;
        for f in 0..nf {
            let r = parts.dissipation_r[f];
            for i in f * n..(f + 1) * n {
                op[(i, i)] -= r;
            }
        }
        if let Some(k) = &parts.resistive_closure {
            let jsr = structure_mat.block(0, dim, dim, nr * n);
            let jrs = structure_mat.block(dim, 0, nr * n, dim);
            op = op.add(&jsr.matmul(&k.matmul(&jrs)));
        }
        let generator = op.matmul(&parts.effort_map);
        let state_lu = match &parts.state_map {
            Some(p) => Some(Arc::new(Lu::factor(p, "state map")?)),
            None => None,
        };
        Ok(Self {
            parts,
            structure_mat,
            generator,
            state_lu,
        })
    }

    pub fn parts(&self) -> &DescriptorParts {
        &self.parts
    }

    pub fn into_parts(self) -> DescriptorParts {
        self.parts
    }

    pub fn name(&self) -> &str {
        &self.parts.name
    }

    pub fn sbp(&self) -> &SbpSet {
        &self.parts.sbp
    }

    pub fn mode(&self) -> BoundaryMode {
        self.parts.mode
    }

    pub fn fields(&self) -> &[FieldLabel] {
        &self.parts.fields
    }

    pub fn n_fields(&self) -> usize {
        self.parts.fields.len() + self.parts.resistive_fields.len()
    }

    pub fn nodes(&self) -> usize {
        self.parts.sbp.len()
    }

    /// Length of the integration variable.
    pub fn dim(&self) -> usize {
        self.parts.fields.len() * self.nodes()
    }

    pub fn descriptor_e(&self) -> &Mat {
        &self.parts.descriptor_e
    }

    pub fn structure(&self) -> &BlockOp {
        &self.parts.structure_j
    }

    pub fn structure_mat(&self) -> &Mat {
        &self.structure_mat
    }

    /// `(J_ss - R + J_sr K J_rs) Q`.
    pub fn generator(&self) -> &Mat {
        &self.generator
    }

    pub fn effort_map(&self) -> &Mat {
        &self.parts.effort_map
    }

    pub fn hamiltonian_kernel(&self) -> &Mat {
        &self.parts.hamiltonian
    }

    pub fn lagrange_kernel(&self) -> &Mat {
        &self.parts.lagrange_kernel
    }

    pub fn boundary_correction(&self) -> &Mat {
        &self.parts.boundary_correction
    }

    pub fn fixed(&self) -> &[usize] {
        &self.parts.fixed
    }

    /// Unknowns that evolve under the current boundary mode, ascending.
    pub fn free_dofs(&self) -> Vec<usize> {
        let mut mask = alloc::vec![true; self.dim()];
        for &i in &self.parts.fixed {
            mask[i] = false;
        }
        (0..self.dim()).filter(|&i| mask[i]).collect()
    }

    pub fn default_dt(&self) -> f64 {
        self.parts.default_dt
    }

    pub fn initializer(&self) -> Option<&Initializer> {
        self.parts.initializer.as_ref()
    }

    pub fn ports(&self) -> &dyn PortModel {
        &*self.parts.ports
    }

    /// Block-diagonal quadrature weights on the storage variables.
    pub fn norm(&self) -> Vec<f64> {
        block_norm(&self.parts.sbp, self.parts.fields.len())
    }

    fn check_len(&self, v: &[f64], context: &'static str) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: v.len(),
                context,
            });
        }
        Ok(())
    }

    /// `1/2 x^T M x`, boundary correction included.
    pub fn eval_hamiltonian(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x, "state")?;
        Ok(0.5 * dot(x, &self.parts.hamiltonian.matvec(x)))
    }

    /// Bulk Lagrange part and endpoint correction of the energy, separately.
    pub fn hamiltonian_split(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_len(x, "state")?;
        let bulk = 0.5 * dot(x, &self.parts.lagrange_kernel.matvec(x));
        let boundary = 0.5 * dot(x, &self.parts.boundary_correction.matvec(x));
        Ok((bulk, boundary))
    }

    /// Storage efforts from the integration variable.
    pub fn effort(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x, "state")?;
        Ok(self.parts.effort_map.matvec(x))
    }

    /// Storage efforts from the physical state, solving the pre-factored
    /// state map when the representation is an image one.
    pub fn eval_effort(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_len(z, "state")?;
        let x = self.latent_from_state(z)?;
        Ok(self.parts.effort_map.matvec(&x))
    }

    pub fn latent_from_state(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_len(z, "state")?;
        Ok(match &self.state_lu {
            Some(lu) => lu.solve(z),
            None => z.to_vec(),
        })
    }

    pub fn state_from_latent(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x, "state")?;
        Ok(match &self.parts.state_map {
            Some(p) => p.matvec(x),
            None => x.to_vec(),
        })
    }

    pub fn read_boundary_ports(&self, x: &[f64], rate: &[f64]) -> Result<PortSample> {
        self.check_len(x, "state")?;
        self.check_len(rate, "state rate")?;
        Ok(self.parts.ports.ports(x, rate))
    }

    /// Runs the assembly-time structural checks and reports every residual.
    pub fn structure_checks(&self) -> Vec<StructureCheck> {
        alloc::vec![
            self.skew_check(),
            self.lagrange_check(),
            self.dissipation_check(),
            self.hamiltonian_check(),
        ]
    }

    fn skew_check(&self) -> StructureCheck {
        let sbp = &self.parts.sbp;
        let j = &self.parts.structure_j;
        let blocks = j.block_rows();
        let h = block_norm(sbp, blocks);
        let ones = alloc::vec![1.0; h.len()];
        let hj = self.structure_mat.scale_rows_cols(&h, &ones);
        let w = hj.add(&hj.transpose()).sub(&j.adjoint_defect(sbp));
        let scale = hj.max_abs().max(f64::MIN_POSITIVE);
        let n = sbp.len();
        let mut worst = (0.0, 0, 0);
        for bi in 0..blocks {
            for bj in 0..blocks {
                let r = w.block(bi * n, bj * n, n, n).max_abs();
                if r > worst.0 {
                    worst = (r, bi, bj);
                }
            }
        }
        let detail = format!(
            "worst block ({}, {}) {}",
            worst.1,
            worst.2,
            self.block_name(worst.1, worst.2)
        );
        StructureCheck::new(
            "skew_modulo_boundary",
            worst.0 / scale,
            STRUCTURE_TOL,
            detail,
        )
    }

    fn block_name(&self, i: usize, j: usize) -> String {
        let label = |k: usize| {
            let nf = self.parts.fields.len();
            if k < nf {
                self.parts.fields[k].name.clone()
            } else {
                self.parts
                    .resistive_fields
                    .get(k - nf)
                    .map_or_else(|| format!("#{k}"), |l| l.name.clone())
            }
        };
        format!("{} <- {}", label(i), label(j))
    }

    fn lagrange_check(&self) -> StructureCheck {
        let k = self
            .parts
            .lagrange_kernel
            .add(&self.parts.boundary_correction);
        let m = &self.parts.hamiltonian;
        let scale = m.max_abs().max(k.max_abs()).max(f64::MIN_POSITIVE);
        let asym = k.sub(&k.transpose()).max_abs() / scale;
        let mismatch = k.sub(m).max_abs() / scale;
        let msym = m.sub(&m.transpose()).max_abs() / scale;
        let residual = asym.max(mismatch).max(msym);
        StructureCheck::new(
            "lagrange_symmetry",
            residual,
            STRUCTURE_TOL,
            format!("asymmetry {asym:.3e}, kernel mismatch {mismatch:.3e}"),
        )
    }

    fn dissipation_check(&self) -> StructureCheck {
        let worst_fold = self
            .parts
            .dissipation_r
            .iter()
            .fold(0.0f64, |acc, &r| acc.max(-r));
        let gram = match &self.parts.resistive_gram {
            Some(g) => semidefinite_defect(g),
            None => 0.0,
        };
        let residual = worst_fold.max(gram);
        StructureCheck::new(
            "dissipation_semidefinite",
            residual,
            1e-12,
            format!("folded {worst_fold:.3e}, resistive {gram:.3e}"),
        )
    }

    fn hamiltonian_check(&self) -> StructureCheck {
        let defect = semidefinite_defect(&self.parts.hamiltonian);
        StructureCheck::new(
            "hamiltonian_nonnegative",
            defect,
            1e-12,
            format!("negative-direction defect {defect:.3e}"),
        )
    }
}

/// Zero when the symmetric part of `m` is positive semidefinite up to a
/// relative shift of `1e-10`; otherwise the size of the first failed pivot,
/// relative to `max |m|`.
pub fn semidefinite_defect(m: &Mat) -> f64 {
    let n = m.rows();
    let scale = m.max_abs();
    if n == 0 || scale == 0.0 {
        return 0.0;
    }
    let shift = 1e-10 * scale;
    let mut a = m.add(&m.transpose()).scale(0.5);
    for i in 0..n {
        a[(i, i)] += shift;
    }
    // Cholesky in place on the lower triangle.
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= a[(j, k)] * a[(j, k)];
        }
        if d <= 0.0 {
            return (shift - d) / scale;
        }
        let d = libm::sqrt(d);
        a[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= a[(i, k)] * a[(j, k)];
            }
            a[(i, j)] = s / d;
        }
    }
    0.0
}

/// Boxed closure adapter so small models and tests can supply ports inline.
pub struct FnPorts<P, D, T>
where
    P: Fn(&[f64], &[f64]) -> PortSample + Send + Sync,
    D: Fn(&[f64]) -> f64 + Send + Sync,
    T: Fn(&[f64], &[f64]) -> Vec<BalanceTerm> + Send + Sync,
{
    pub ports: P,
    pub dissipation: D,
    pub terms: T,
}

impl<P, D, T> PortModel for FnPorts<P, D, T>
where
    P: Fn(&[f64], &[f64]) -> PortSample + Send + Sync,
    D: Fn(&[f64]) -> f64 + Send + Sync,
    T: Fn(&[f64], &[f64]) -> Vec<BalanceTerm> + Send + Sync,
{
    fn ports(&self, x: &[f64], rate: &[f64]) -> PortSample {
        (self.ports)(x, rate)
    }
    fn dissipation(&self, x: &[f64]) -> f64 {
        (self.dissipation)(x)
    }
    fn balance_terms(&self, x: &[f64], rate: &[f64]) -> Vec<BalanceTerm> {
        (self.terms)(x, rate)
    }
}

/// A port model with no ports and no losses.
pub fn silent_ports() -> Arc<dyn PortModel> {
    let p: Box<dyn PortModel> = Box::new(FnPorts {
        ports: |_: &[f64], _: &[f64]| PortSample {
            left: EndPorts::default(),
            right: EndPorts::default(),
            pairing: EnergyPairing::ChiRate,
        },
        dissipation: |_: &[f64]| 0.0,
        terms: |_: &[f64], _: &[f64]| Vec::new(),
    });
    Arc::from(p)
}
