//! Timoshenko and Euler-Bernoulli beams under axial tension `T0`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    ends, field, fixed_at, fixed_if, h_times, labels, name_of, require, scaled, two_layers,
    weighted_gram, PortVectors,
};
use crate::blockop::{BlockOp, DPoly};
use crate::descriptor::{
    BalanceTerm, BoundaryMode, DescriptorParts, EnergyPairing, FieldLabel, PhDescriptor, PortModel,
    PortSample, TermKind,
};
use crate::error::Result;
use crate::linalg::Mat;
use crate::sbp::{Grid1D, SbpSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamParams {
    pub rho: f64,
    pub a_sec: f64,
    pub i_mom: f64,
    pub e_mod: f64,
    pub t0: f64,
    /// Shear correction times shear modulus.
    pub kappa_g: f64,
}

impl Default for BeamParams {
    fn default() -> Self {
        Self {
            rho: 1.0,
            a_sec: 1.0,
            i_mom: 1.0,
            e_mod: 1.0,
            t0: 1.0,
            kappa_g: 1.0,
        }
    }
}

impl BeamParams {
    pub fn validate(&self) -> Result<()> {
        require("rho", self.rho, true)?;
        require("A_sec", self.a_sec, true)?;
        require("I_mom", self.i_mom, true)?;
        require("E_mod", self.e_mod, true)?;
        require("T0", self.t0, false)?;
        require("kappaG", self.kappa_g, true)
    }

    pub(crate) fn slot(&mut self, key: &str) -> Option<&mut f64> {
        match key {
            "rho" => Some(&mut self.rho),
            "A_sec" => Some(&mut self.a_sec),
            "I_mom" => Some(&mut self.i_mom),
            "E_mod" => Some(&mut self.e_mod),
            "T0" => Some(&mut self.t0),
            "kappaG" => Some(&mut self.kappa_g),
            _ => None,
        }
    }

    pub fn coefficients(&self) -> BeamCoefficients {
        BeamCoefficients {
            t0: self.t0,
            rho_a: self.rho * self.a_sec,
            rho_i: self.rho * self.i_mom,
            ei: self.e_mod * self.i_mom,
            akg: self.a_sec * self.kappa_g,
        }
    }
}

/// Lumped coefficients entering the operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamCoefficients {
    pub t0: f64,
    pub rho_a: f64,
    pub rho_i: f64,
    pub ei: f64,
    pub akg: f64,
}

impl BeamCoefficients {
    /// Constitutive diagonal on `(eps_w, p_w, eps_phi, p_phi, eps_wphi)`.
    pub fn q_explicit(&self) -> [f64; 5] {
        [
            self.t0,
            1.0 / self.rho_a,
            self.ei,
            1.0 / self.rho_i,
            self.akg,
        ]
    }

    /// Constitutive diagonal on `(eps_w, eps_phi, p_w)`.
    pub fn q_reduced(&self) -> [f64; 3] {
        [self.t0, self.ei, 1.0 / self.rho_a]
    }

    fn timoshenko_dt(&self, h: f64) -> f64 {
        let c2 = ((self.t0 + self.akg) / self.rho_a)
            .max(self.ei / self.rho_i)
            .max(self.akg / self.rho_i);
        0.5 * h / libm::sqrt(c2).max(1e-12)
    }

    fn bending_dt(&self, h: f64) -> f64 {
        let c = libm::sqrt(self.t0 / self.rho_a)
            + libm::sqrt(self.ei / self.rho_a) * core::f64::consts::PI / h;
        0.5 * h / c.max(1e-12)
    }
}

fn z() -> DPoly {
    DPoly::zero()
}

fn c(v: f64) -> DPoly {
    DPoly::constant(v)
}

fn d() -> DPoly {
    DPoly::d(1.0)
}

/// Interconnection of the explicit Timoshenko beam on
/// `(sigma_w, v, sigma_phi, omega, N)`.
pub fn structure_timoshenko_explicit() -> BlockOp {
    BlockOp::from_rows(vec![
        vec![z(), d(), z(), z(), z()],
        vec![d(), z(), z(), z(), d()],
        vec![z(), z(), z(), d(), z()],
        vec![z(), z(), d(), z(), c(1.0)],
        vec![z(), d(), z(), c(-1.0), z()],
    ])
}

/// Interconnection of the reduced explicit Euler-Bernoulli beam on
/// `(sigma_w, sigma_phi, v)`.
pub fn structure_eb_reduced_explicit() -> BlockOp {
    BlockOp::from_rows(vec![
        vec![z(), z(), d()],
        vec![z(), z(), DPoly::d2(1.0)],
        vec![d(), DPoly::d2(-1.0), z()],
    ])
}

/// Canonical symplectic structure on `pairs` (position, momentum) pairs.
pub fn structure_canonical(pairs: usize) -> BlockOp {
    let mut j = BlockOp::zeros(2 * pairs, 2 * pairs);
    for k in 0..pairs {
        j.set(2 * k, 2 * k + 1, c(1.0));
        j.set(2 * k + 1, 2 * k, c(-1.0));
    }
    j
}

/// Implicit-to-explicit state map `(w, p_w, phi, p_phi) ->
/// (D w, p_w, D phi, p_phi, D w - phi)`.
pub fn g_timoshenko() -> BlockOp {
    BlockOp::from_rows(vec![
        vec![d(), z(), z(), z()],
        vec![z(), c(1.0), z(), z()],
        vec![z(), z(), d(), z()],
        vec![z(), z(), z(), c(1.0)],
        vec![d(), z(), c(-1.0), z()],
    ])
}

/// Reduced map `(w, p_w) -> (D w, D^2 w, p_w)`.
pub fn g_reduced() -> BlockOp {
    BlockOp::from_rows(vec![
        vec![d(), z()],
        vec![DPoly::d2(1.0), z()],
        vec![z(), c(1.0)],
    ])
}

fn diag_mat(coeffs: &[f64], n: usize) -> Mat {
    Mat::from_diag(&coeffs.iter().flat_map(|&c| vec![c; n]).collect::<Vec<_>>())
}

fn explicit_labels() -> Vec<FieldLabel> {
    labels(&[
        ("eps_w", "1"),
        ("p_w", "kg/s"),
        ("eps_phi", "1/m"),
        ("p_phi", "kg m/s"),
        ("eps_wphi", "1"),
    ])
}

fn implicit_labels() -> Vec<FieldLabel> {
    labels(&[
        ("w", "m"),
        ("p_w", "kg/s"),
        ("phi", "1"),
        ("p_phi", "kg m/s"),
    ])
}

fn timoshenko_explicit_parts(
    params: &BeamParams,
    grid: &Grid1D,
    mode: BoundaryMode,
    dae: bool,
) -> Result<DescriptorParts> {
    params.validate()?;
    let sbp = SbpSet::new(grid);
    let n = sbp.len();
    let k = params.coefficients();
    let q = diag_mat(&k.q_explicit(), n);
    let e_diag: [f64; 5] = if dae {
        [1.0, 1.0, 1.0, 0.0, 0.0]
    } else {
        [1.0; 5]
    };
    let e = diag_mat(&e_diag, n);
    let hamiltonian = h_times(&sbp, 5, &e.matmul(&q));
    let (name, fixed, ports): (_, _, Arc<dyn PortModel>) = if dae {
        let mut fixed = fixed_at(&[1], &two_layers(n), n);
        fixed.extend(fixed_at(&[3, 4], &ends(n), n));
        fixed.sort_unstable();
        (
            "eb_explicit_dae",
            fixed,
            Arc::new(EbExplicitPorts::new(&sbp, k, [0, 2, 1])),
        )
    } else {
        (
            "timoshenko_explicit",
            fixed_at(&[1, 3], &ends(n), n),
            Arc::new(TimoshenkoExplicitPorts {
                sbp: sbp.clone(),
                k,
            }),
        )
    };
    Ok(DescriptorParts {
        name: name_of(name, mode),
        mode,
        fields: explicit_labels(),
        resistive_fields: Vec::new(),
        descriptor_e: e.clone(),
        structure_j: structure_timoshenko_explicit(),
        dissipation_r: vec![0.0; 5],
        resistive_closure: None,
        resistive_gram: None,
        effort_map: q.clone(),
        lagrange_s: q,
        lagrange_p: e,
        lagrange_kernel: hamiltonian.clone(),
        boundary_correction: Mat::zeros(5 * n, 5 * n),
        hamiltonian,
        state_map: None,
        fixed: fixed_if(mode, fixed),
        default_dt: if dae {
            k.bending_dt(grid.spacing())
        } else {
            k.timoshenko_dt(grid.spacing())
        },
        ports,
        initializer: None,
        sbp,
    })
}

pub fn timoshenko_explicit(
    params: &BeamParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<PhDescriptor> {
    PhDescriptor::assemble(timoshenko_explicit_parts(params, grid, mode, false)?)
}

/// Timoshenko interconnection with the rotational momentum and shear strain
/// frozen (`E = diag(1, 1, 1, 0, 0)`).
pub fn eb_explicit_dae(
    params: &BeamParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<PhDescriptor> {
    PhDescriptor::assemble(timoshenko_explicit_parts(params, grid, mode, true)?)
}

pub fn eb_explicit_reduced(
    params: &BeamParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<PhDescriptor> {
    params.validate()?;
    let sbp = SbpSet::new(grid);
    let n = sbp.len();
    let k = params.coefficients();
    let q = diag_mat(&k.q_reduced(), n);
    let hamiltonian = h_times(&sbp, 3, &q);
    let parts = DescriptorParts {
        name: name_of("eb_explicit_reduced", mode),
        mode,
        fields: labels(&[("eps_w", "1"), ("eps_phi", "1/m"), ("p_w", "kg/s")]),
        resistive_fields: Vec::new(),
        descriptor_e: Mat::identity(3 * n),
        structure_j: structure_eb_reduced_explicit(),
        dissipation_r: vec![0.0; 3],
        resistive_closure: None,
        resistive_gram: None,
        effort_map: q.clone(),
        lagrange_s: q,
        lagrange_p: Mat::identity(3 * n),
        lagrange_kernel: hamiltonian.clone(),
        boundary_correction: Mat::zeros(3 * n, 3 * n),
        hamiltonian,
        state_map: None,
        fixed: fixed_if(mode, fixed_at(&[2], &two_layers(n), n)),
        default_dt: k.bending_dt(grid.spacing()),
        ports: Arc::new(EbExplicitPorts::new(&sbp, k, [0, 1, 2])),
        initializer: None,
        sbp,
    };
    PhDescriptor::assemble(parts)
}

/// Implicit Timoshenko beam: canonical structure, `S = G† Q G`.
pub fn timoshenko_implicit(
    params: &BeamParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<PhDescriptor> {
    params.validate()?;
    let sbp = SbpSet::new(grid);
    let n = sbp.len();
    let k = params.coefficients();
    let qc = k.q_explicit();
    let g = g_timoshenko();
    let s_op = g.formal_adjoint().compose(&BlockOp::diag(&qc)).compose(&g);
    let s = s_op.to_mat(&sbp);
    let q = diag_mat(&qc, n);
    let correction = g.adjoint_defect(&sbp).matmul(&q).matmul(&g.to_mat(&sbp));
    let parts = DescriptorParts {
        name: name_of("timoshenko_implicit", mode),
        mode,
        fields: implicit_labels(),
        resistive_fields: Vec::new(),
        descriptor_e: Mat::identity(4 * n),
        structure_j: structure_canonical(2),
        dissipation_r: vec![0.0; 4],
        resistive_closure: None,
        resistive_gram: None,
        effort_map: s.clone(),
        lagrange_kernel: h_times(&sbp, 4, &s),
        lagrange_s: s,
        lagrange_p: Mat::identity(4 * n),
        boundary_correction: correction,
        hamiltonian: weighted_gram(&sbp, &g, &qc),
        state_map: None,
        fixed: fixed_if(mode, fixed_at(&[0, 1, 2, 3], &ends(n), n)),
        default_dt: k.timoshenko_dt(grid.spacing()),
        ports: Arc::new(TimoshenkoImplicitPorts {
            sbp: sbp.clone(),
            k,
        }),
        initializer: None,
        sbp,
    };
    PhDescriptor::assemble(parts)
}

/// Energy blocks of the implicit Euler-Bernoulli beam on `(w, p_w)`:
/// `(S_r, H S_r, correction, M)`.
fn eb_implicit_energy(sbp: &SbpSet, k: &BeamCoefficients) -> (Mat, Mat, Mat, Mat) {
    let n = sbp.len();
    let qc = k.q_reduced();
    let g = g_reduced();
    let s = g
        .formal_adjoint()
        .compose(&BlockOp::diag(&qc))
        .compose(&g)
        .to_mat(sbp);
    let correction = g
        .adjoint_defect(sbp)
        .matmul(&diag_mat(&qc, n))
        .matmul(&g.to_mat(sbp));
    let kernel = h_times(sbp, 2, &s);
    (s, kernel, correction, weighted_gram(sbp, &g, &qc))
}

/// Implicit Euler-Bernoulli beam with the rotation kept as a constrained
/// field: `phi = D w` is an algebraic row and `p_phi = rho I D v` a hidden
/// constraint. The shear force is eliminated, so the bending moment acts
/// through `EI D phi`.
pub fn eb_implicit_dae(
    params: &BeamParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<PhDescriptor> {
    params.validate()?;
    let sbp = SbpSet::new(grid);
    let n = sbp.len();
    let k = params.coefficients();
    let (s_r, kernel_r, corr_r, m_r) = eb_implicit_energy(&sbp, &k);
    let embed = |m: &Mat| {
        let mut out = Mat::zeros(4 * n, 4 * n);
        out.set_block(0, 0, m);
        out
    };
    let effort = BlockOp::from_rows(vec![
        vec![DPoly::d2(-k.t0), z(), DPoly::monomial(k.ei, 3), z()],
        vec![z(), c(1.0 / k.rho_a), z(), z()],
        vec![DPoly::d(-k.akg), z(), c(k.akg), z()],
        vec![z(), z(), z(), c(1.0 / k.rho_i)],
    ])
    .to_mat(&sbp);
    let mut e = Mat::identity(4 * n);
    for i in 2 * n..4 * n {
        e[(i, i)] = 0.0;
    }
    e.set_block(2 * n, 0, sbp.d1());
    let mut fixed = fixed_at(&[0, 1], &two_layers(n), n);
    fixed.extend(fixed_at(&[2, 3], &ends(n), n));
    fixed.sort_unstable();
    let parts = DescriptorParts {
        name: name_of("eb_implicit_dae", mode),
        mode,
        fields: implicit_labels(),
        resistive_fields: Vec::new(),
        descriptor_e: e,
        structure_j: structure_canonical(2),
        dissipation_r: vec![0.0; 4],
        resistive_closure: None,
        resistive_gram: None,
        effort_map: effort,
        lagrange_s: embed(&s_r),
        lagrange_p: Mat::identity(4 * n),
        lagrange_kernel: embed(&kernel_r),
        boundary_correction: embed(&corr_r),
        hamiltonian: embed(&m_r),
        state_map: None,
        fixed: fixed_if(mode, fixed),
        default_dt: k.bending_dt(grid.spacing()),
        ports: Arc::new(EbImplicitPorts {
            sbp: sbp.clone(),
            k,
        }),
        initializer: None,
        sbp,
    };
    PhDescriptor::assemble(parts)
}

pub fn eb_implicit_reduced(
    params: &BeamParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<PhDescriptor> {
    params.validate()?;
    let sbp = SbpSet::new(grid);
    let n = sbp.len();
    let k = params.coefficients();
    let (s_r, kernel_r, corr_r, m_r) = eb_implicit_energy(&sbp, &k);
    let parts = DescriptorParts {
        name: name_of("eb_implicit_reduced", mode),
        mode,
        fields: labels(&[("w", "m"), ("p_w", "kg/s")]),
        resistive_fields: Vec::new(),
        descriptor_e: Mat::identity(2 * n),
        structure_j: structure_canonical(1),
        dissipation_r: vec![0.0; 2],
        resistive_closure: None,
        resistive_gram: None,
        effort_map: s_r.clone(),
        lagrange_s: s_r,
        lagrange_p: Mat::identity(2 * n),
        lagrange_kernel: kernel_r,
        boundary_correction: corr_r,
        hamiltonian: m_r,
        state_map: None,
        fixed: fixed_if(mode, fixed_at(&[0, 1], &two_layers(n), n)),
        default_dt: k.bending_dt(grid.spacing()),
        ports: Arc::new(EbImplicitPorts {
            sbp: sbp.clone(),
            k,
        }),
        initializer: None,
        sbp,
    };
    PhDescriptor::assemble(parts)
}

struct TimoshenkoExplicitPorts {
    sbp: SbpSet,
    k: BeamCoefficients,
}

impl PortModel for TimoshenkoExplicitPorts {
    fn ports(&self, x: &[f64], _rate: &[f64]) -> PortSample {
        let n = self.sbp.len();
        let q = self.k.q_explicit();
        let e = |i: usize| scaled(field(x, i, n), q[i]);
        let v = e(1);
        PortVectors {
            flow: vec![v.clone(), v, e(3)],
            effort: vec![e(0), e(4), e(2)],
            chi: Vec::new(),
            eps: Vec::new(),
            chi_rate: Vec::new(),
            eps_rate: Vec::new(),
            pairing: EnergyPairing::ChiRate,
        }
        .sample()
    }

    fn dissipation(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn balance_terms(&self, x: &[f64], _rate: &[f64]) -> Vec<BalanceTerm> {
        let n = self.sbp.len();
        let k = self.k;
        let at = |i: usize, j: usize| x[i * n + j];
        let br = |a: usize, ca: f64, b: usize, cb: f64| {
            ca * cb * (at(a, n - 1) * at(b, n - 1) - at(a, 0) * at(b, 0))
        };
        vec![
            BalanceTerm {
                name: "v_sigma_w",
                kind: TermKind::Boundary,
                value: br(1, 1.0 / k.rho_a, 0, k.t0),
            },
            BalanceTerm {
                name: "v_N",
                kind: TermKind::Boundary,
                value: br(1, 1.0 / k.rho_a, 4, k.akg),
            },
            BalanceTerm {
                name: "omega_sigma_phi",
                kind: TermKind::Boundary,
                value: br(3, 1.0 / k.rho_i, 2, k.ei),
            },
        ]
    }
}

/// Ports shared by both explicit Euler-Bernoulli forms; `idx` locates
/// `(eps_w, eps_phi, p_w)` among the fields.
struct EbExplicitPorts {
    sbp: SbpSet,
    k: BeamCoefficients,
    idx: [usize; 3],
}

impl EbExplicitPorts {
    fn new(sbp: &SbpSet, k: BeamCoefficients, idx: [usize; 3]) -> Self {
        Self {
            sbp: sbp.clone(),
            k,
            idx,
        }
    }

    fn efforts(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.sbp.len();
        (
            scaled(field(x, self.idx[0], n), self.k.t0),
            scaled(field(x, self.idx[1], n), self.k.ei),
            scaled(field(x, self.idx[2], n), 1.0 / self.k.rho_a),
        )
    }
}

impl PortModel for EbExplicitPorts {
    fn ports(&self, x: &[f64], _rate: &[f64]) -> PortSample {
        let (sw, sp, v) = self.efforts(x);
        let dv = self.sbp.apply_d(&v);
        let dsp = self.sbp.apply_d(&sp);
        PortVectors {
            flow: vec![v.clone(), v, dv],
            effort: vec![sw, scaled(&dsp, -1.0), sp],
            chi: Vec::new(),
            eps: Vec::new(),
            chi_rate: Vec::new(),
            eps_rate: Vec::new(),
            pairing: EnergyPairing::ChiRate,
        }
        .sample()
    }

    fn dissipation(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn balance_terms(&self, x: &[f64], _rate: &[f64]) -> Vec<BalanceTerm> {
        let (sw, sp, v) = self.efforts(x);
        let s = &self.sbp;
        let d = s.d1();
        vec![
            BalanceTerm {
                name: "v_sigma_w",
                kind: TermKind::Boundary,
                value: s.bracket(&v, &sw),
            },
            BalanceTerm {
                name: "minus_v_dsigma_phi",
                kind: TermKind::Boundary,
                value: -s.bracket(&v, &d.matvec(&sp)),
            },
            BalanceTerm {
                name: "sigma_phi_dv",
                kind: TermKind::Boundary,
                value: s.bracket(&sp, &d.matvec(&v)),
            },
        ]
    }
}

struct TimoshenkoImplicitPorts {
    sbp: SbpSet,
    k: BeamCoefficients,
}

impl PortModel for TimoshenkoImplicitPorts {
    fn ports(&self, x: &[f64], rate: &[f64]) -> PortSample {
        let n = self.sbp.len();
        let k = self.k;
        let w = field(x, 0, n);
        let phi = field(x, 2, n);
        let dw = self.sbp.apply_d(w);
        let shear: Vec<f64> = dw.iter().zip(phi).map(|(a, b)| k.akg * (a - b)).collect();
        let wdot = field(rate, 0, n).to_vec();
        PortVectors {
            flow: Vec::new(),
            effort: Vec::new(),
            chi: vec![w.to_vec(), w.to_vec(), phi.to_vec()],
            eps: vec![
                scaled(&dw, k.t0),
                shear,
                scaled(&self.sbp.apply_d(phi), k.ei),
            ],
            chi_rate: vec![wdot.clone(), wdot, field(rate, 2, n).to_vec()],
            eps_rate: Vec::new(),
            pairing: EnergyPairing::ChiRate,
        }
        .sample()
    }

    fn dissipation(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn balance_terms(&self, x: &[f64], rate: &[f64]) -> Vec<BalanceTerm> {
        let n = self.sbp.len();
        let k = self.k;
        let s = &self.sbp;
        let w = &x[..n];
        let phi = &x[2 * n..3 * n];
        let dw = s.d1().matvec(w);
        let dphi = s.d1().matvec(phi);
        let force: Vec<f64> = (0..n)
            .map(|i| k.t0 * dw[i] + k.akg * (dw[i] - phi[i]))
            .collect();
        let moment: Vec<f64> = dphi.iter().map(|a| k.ei * a).collect();
        vec![
            BalanceTerm {
                name: "wdot_force",
                kind: TermKind::Boundary,
                value: s.bracket(&rate[..n], &force),
            },
            BalanceTerm {
                name: "phidot_moment",
                kind: TermKind::Boundary,
                value: s.bracket(&rate[2 * n..3 * n], &moment),
            },
        ]
    }
}

/// Ports of both implicit Euler-Bernoulli forms; `w` is always field 0.
struct EbImplicitPorts {
    sbp: SbpSet,
    k: BeamCoefficients,
}

impl PortModel for EbImplicitPorts {
    fn ports(&self, x: &[f64], rate: &[f64]) -> PortSample {
        let n = self.sbp.len();
        let k = self.k;
        let w = field(x, 0, n);
        let dw = self.sbp.apply_d(w);
        let moment = scaled(&self.sbp.apply_d(&dw), k.ei);
        let shear = scaled(&self.sbp.apply_d(&moment), -1.0);
        let wdot = field(rate, 0, n).to_vec();
        PortVectors {
            flow: Vec::new(),
            effort: Vec::new(),
            chi: vec![w.to_vec(), w.to_vec(), dw.clone()],
            eps: vec![scaled(&dw, k.t0), shear, moment],
            chi_rate: vec![wdot.clone(), wdot.clone(), self.sbp.apply_d(&wdot)],
            eps_rate: Vec::new(),
            pairing: EnergyPairing::ChiRate,
        }
        .sample()
    }

    fn dissipation(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn balance_terms(&self, x: &[f64], rate: &[f64]) -> Vec<BalanceTerm> {
        let n = self.sbp.len();
        let k = self.k;
        let s = &self.sbp;
        let w = &x[..n];
        let dw = s.d1().matvec(w);
        let d2w = s.d_power(2).matvec(w);
        let d3w = s.d_power(3).matvec(w);
        let force: Vec<f64> = (0..n).map(|i| k.t0 * dw[i] - k.ei * d3w[i]).collect();
        let moment: Vec<f64> = d2w.iter().map(|a| k.ei * a).collect();
        let wdot = &rate[..n];
        vec![
            BalanceTerm {
                name: "wdot_force",
                kind: TermKind::Boundary,
                value: s.bracket(wdot, &force),
            },
            BalanceTerm {
                name: "dwdot_moment",
                kind: TermKind::Boundary,
                value: s.bracket(&s.d1().matvec(wdot), &moment),
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbp::build_grid;

    #[test]
    fn constant_strain_energy() {
        let g = build_grid(0.0, 1.0, 11).unwrap();
        let p = BeamParams {
            t0: 2.0,
            ..Default::default()
        };
        let d = timoshenko_explicit(&p, &g, BoundaryMode::Free).unwrap();
        let mut x = vec![0.0; 55];
        x[..11].fill(1.0);
        assert!((d.eval_hamiltonian(&x).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn implicit_stiffness_matches_closed_form() {
        let g = build_grid(0.0, 1.0, 9).unwrap();
        let p = BeamParams {
            t0: 0.7,
            kappa_g: 1.3,
            ..Default::default()
        };
        let k = p.coefficients();
        let gm = g_timoshenko();
        let s = gm
            .formal_adjoint()
            .compose(&BlockOp::diag(&k.q_explicit()))
            .compose(&gm);
        assert_eq!(s.get(0, 0).coeffs(), &[0.0, 0.0, -(k.t0 + k.akg)]);
        assert_eq!(s.get(0, 2).coeffs(), &[0.0, k.akg]);
        assert_eq!(s.get(2, 0).coeffs(), &[0.0, -k.akg]);
        assert_eq!(s.get(2, 2).coeffs(), &[k.akg, 0.0, -k.ei]);
        let _ = timoshenko_implicit(&p, &g, BoundaryMode::Free).unwrap();
    }
}
