//! Dzektser seepage equation
//! `(1 - eps^2 d_xx) h_t = alpha h_xx - beta h_xxxx`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{fixed_at, fixed_if, labels, name_of, require, scaled, two_layers, PortVectors};
use crate::blockop::{BlockOp, DPoly};
use crate::descriptor::{
    BalanceTerm, BoundaryMode, DescriptorParts, EnergyPairing, PhDescriptor, PortModel, PortSample,
    TermKind,
};
use crate::error::Result;
use crate::linalg::{block_diag, Mat};
use crate::sbp::{Grid1D, SbpSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DzektserParams {
    pub alpha_s: f64,
    pub beta_s: f64,
    pub eps_nl: f64,
}

impl Default for DzektserParams {
    fn default() -> Self {
        Self {
            alpha_s: 1.0,
            beta_s: 1.0,
            eps_nl: 0.1,
        }
    }
}

impl DzektserParams {
    pub fn validate(&self) -> Result<()> {
        // zero alpha or beta are admitted: the heat-equation limit needs beta = 0
        require("alpha_s", self.alpha_s, false)?;
        require("beta_s", self.beta_s, false)?;
        require("eps_nl", self.eps_nl, false)
    }

    pub(crate) fn slot(&mut self, key: &str) -> Option<&mut f64> {
        match key {
            "alpha_s" => Some(&mut self.alpha_s),
            "beta_s" => Some(&mut self.beta_s),
            "eps_nl" => Some(&mut self.eps_nl),
            _ => None,
        }
    }
}

/// Single storage field `h` with the two resistive ports
/// `F_grad = D h`, `F_lap = D^2 h` closed by `E_grad = alpha F_grad`,
/// `E_lap = beta F_lap`.
pub fn dzektser_explicit(
    params: &DzektserParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<PhDescriptor> {
    params.validate()?;
    let sbp = SbpSet::new(grid);
    let n = sbp.len();
    let eps2 = params.eps_nl * params.eps_nl;

    let s_op = DPoly::from_coeffs(&[1.0, 0.0, -eps2]);
    let s = s_op.to_mat(&sbp);
    let d = sbp.d1().clone();
    let h = sbp.norm_mat();
    let hd = h.matmul(&d);

    let structure_j = BlockOp::from_rows(vec![
        vec![DPoly::zero(), DPoly::d(1.0), DPoly::d2(-1.0)],
        vec![DPoly::d(1.0), DPoly::zero(), DPoly::zero()],
        vec![DPoly::d2(1.0), DPoly::zero(), DPoly::zero()],
    ]);
    let closure = block_diag(&[
        &Mat::identity(n).scale(params.alpha_s),
        &Mat::identity(n).scale(params.beta_s),
    ]);
    let gram = block_diag(&[&h.scale(params.alpha_s), &h.scale(params.beta_s)]);

    let lagrange_kernel = h.matmul(&s);
    let boundary_correction = sbp.boundary_mat().matmul(&d).scale(eps2);
    let hamiltonian = h.add(&d.transpose().matmul(&hd).scale(eps2));

    let ports = DzektserPorts {
        d3: sbp.d_power(3),
        d2: sbp.d_power(2),
        sbp: sbp.clone(),
        p: *params,
    };

    let parts = DescriptorParts {
        name: name_of("dzektser_explicit", mode),
        mode,
        fields: labels(&[("h", "m")]),
        resistive_fields: labels(&[("F_grad", "1"), ("F_lap", "1/m")]),
        descriptor_e: s.clone(),
        structure_j,
        dissipation_r: vec![0.0],
        resistive_closure: Some(closure),
        resistive_gram: Some(gram),
        effort_map: Mat::identity(n),
        lagrange_s: s,
        lagrange_p: Mat::identity(n),
        lagrange_kernel,
        boundary_correction,
        hamiltonian,
        state_map: None,
        fixed: fixed_if(mode, fixed_at(&[0], &two_layers(n), n)),
        default_dt: 0.5 * grid.spacing(),
        ports: Arc::new(ports),
        initializer: None,
        sbp,
    };
    PhDescriptor::assemble(parts)
}

struct DzektserPorts {
    sbp: SbpSet,
    d2: Mat,
    d3: Mat,
    p: DzektserParams,
}

impl PortModel for DzektserPorts {
    fn ports(&self, x: &[f64], rate: &[f64]) -> PortSample {
        let (a, b) = (self.p.alpha_s, self.p.beta_s);
        let eps2 = self.p.eps_nl * self.p.eps_nl;
        let dh = self.sbp.apply_d(x);
        let d2h = self.sbp.apply_d(&dh);
        let d3h = self.sbp.apply_d(&d2h);
        PortVectors {
            flow: vec![x.to_vec(), x.to_vec(), dh.clone()],
            effort: vec![scaled(&dh, a), scaled(&d3h, -b), scaled(&d2h, b)],
            chi: vec![x.to_vec()],
            eps: vec![scaled(&dh, eps2)],
            chi_rate: vec![rate.to_vec()],
            eps_rate: vec![scaled(&self.sbp.apply_d(rate), eps2)],
            pairing: EnergyPairing::EpsRate,
        }
        .sample()
    }

    fn dissipation(&self, x: &[f64]) -> f64 {
        let dh = self.sbp.apply_d(x);
        let d2h = self.sbp.apply_d(&dh);
        self.p.alpha_s * self.sbp.inner(&dh, &dh) + self.p.beta_s * self.sbp.inner(&d2h, &d2h)
    }

    fn balance_terms(&self, x: &[f64], rate: &[f64]) -> Vec<BalanceTerm> {
        let (a, b) = (self.p.alpha_s, self.p.beta_s);
        let eps2 = self.p.eps_nl * self.p.eps_nl;
        let s = &self.sbp;
        let dh = s.d1().matvec(x);
        let d2h = self.d2.matvec(x);
        let d3h = self.d3.matvec(x);
        let dhdot = s.d1().matvec(rate);
        let w = s.norm();
        let sq = |u: &[f64]| u.iter().zip(w).map(|(v, w)| v * v * w).sum::<f64>();
        vec![
            BalanceTerm {
                name: "alpha_h_dh",
                kind: TermKind::Boundary,
                value: a * s.bracket(x, &dh),
            },
            BalanceTerm {
                name: "beta_h_d3h",
                kind: TermKind::Boundary,
                value: -b * s.bracket(x, &d3h),
            },
            BalanceTerm {
                name: "beta_dh_d2h",
                kind: TermKind::Boundary,
                value: b * s.bracket(&dh, &d2h),
            },
            BalanceTerm {
                name: "eps2_h_dhdot",
                kind: TermKind::Boundary,
                value: eps2 * s.bracket(x, &dhdot),
            },
            BalanceTerm {
                name: "alpha_grad_sq",
                kind: TermKind::Dissipation,
                value: a * sq(&dh),
            },
            BalanceTerm {
                name: "beta_lap_sq",
                kind: TermKind::Dissipation,
                value: b * sq(&d2h),
            },
        ]
    }
}
