//! Damped nonlocal nanorod on an elastic foundation.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    ends, field, fixed_at, fixed_if, h_times, labels, name_of, require, scaled, PortVectors,
};
use crate::blockop::{BlockOp, DPoly};
use crate::descriptor::{
    BalanceTerm, BoundaryMode, DescriptorParts, EnergyPairing, PhDescriptor, PortModel, PortSample,
    TermKind,
};
use crate::error::Result;
use crate::linalg::{block_diag, Lu, Mat};
use crate::sbp::{Grid1D, SbpSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NanorodParams {
    /// Foundation stiffness, used identically in both representations.
    pub k_f: f64,
    pub rho_a: f64,
    pub mu_nl: f64,
    pub e_mod: f64,
    pub a_sec: f64,
    pub b_damp: f64,
    pub tau_d: f64,
}

impl Default for NanorodParams {
    fn default() -> Self {
        Self {
            k_f: 1.0,
            rho_a: 1.0,
            mu_nl: 0.1,
            e_mod: 1.0,
            a_sec: 1.0,
            b_damp: 1.0,
            tau_d: 1.0,
        }
    }
}

impl NanorodParams {
    fn validate_common(&self) -> Result<()> {
        require("k_f", self.k_f, false)?;
        require("rhoA", self.rho_a, true)?;
        require("mu_nl", self.mu_nl, false)?;
        require("E_mod", self.e_mod, true)?;
        require("A_sec", self.a_sec, true)?;
        require("b_damp", self.b_damp, false)
    }

    pub(crate) fn slot(&mut self, key: &str) -> Option<&mut f64> {
        match key {
            "k_f" => Some(&mut self.k_f),
            "rhoA" => Some(&mut self.rho_a),
            "mu_nl" => Some(&mut self.mu_nl),
            "E_mod" => Some(&mut self.e_mod),
            "A_sec" => Some(&mut self.a_sec),
            "b_damp" => Some(&mut self.b_damp),
            "tau_d" => Some(&mut self.tau_d),
            _ => None,
        }
    }

    fn ea(&self) -> f64 {
        self.e_mod * self.a_sec
    }
}

/// `1 - mu D^2`, with identity rows at the ends in clamped mode
/// (homogeneous Dirichlet data for the nonlocal solve).
fn nonlocal_op(sbp: &SbpSet, mu: f64, mode: BoundaryMode) -> Mat {
    let n = sbp.len();
    let mut p = DPoly::from_coeffs(&[1.0, 0.0, -mu]).to_mat(sbp);
    if mode == BoundaryMode::Clamped {
        for i in ends(n) {
            for j in 0..n {
                p[(i, j)] = if i == j { 1.0 } else { 0.0 };
            }
        }
    }
    p
}

/// `(1 - mu D^2)^-1`; in clamped mode the end values are pinned to zero and
/// the end rows of the right-hand side are ignored.
fn nonlocal_inverse(sbp: &SbpSet, mu: f64, mode: BoundaryMode) -> Result<Mat> {
    let n = sbp.len();
    let lu = Lu::factor(&nonlocal_op(sbp, mu, mode), "nonlocal operator")?;
    let mut inv = lu.solve_mat(&Mat::identity(n));
    if mode == BoundaryMode::Clamped {
        for i in ends(n) {
            for k in 0..n {
                inv[(k, i)] = 0.0;
            }
        }
    }
    Ok(inv)
}

/// Parts of the implicit (image) representation with latent state
/// `xi = (xi_1, xi_2, xi_3)`: `z = P xi`, `e = S xi`,
/// `P = diag(1, 1 - mu D^2, 1)`, `S = diag(k_f, E, 1/rhoA)`.
///
/// No sign checks on `tau_d`; use [`nanorod_implicit`] for validated input.
pub fn nanorod_implicit_parts(
    params: &NanorodParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<DescriptorParts> {
    params.validate_common()?;
    let sbp = SbpSet::new(grid);
    let n = sbp.len();
    let p = *params;
    let h = sbp.norm_mat();
    let d = sbp.d1().clone();
    let id = Mat::identity(n);

    let p2 = nonlocal_op(&sbp, p.mu_nl, mode);
    let p_mat = block_diag(&[&id, &p2, &id]);
    let s_mat =
        Mat::from_diag(&[vec![p.k_f; n], vec![p.e_mod; n], vec![1.0 / p.rho_a; n]].concat());

    let structure_j = BlockOp::from_rows(vec![
        vec![
            DPoly::zero(),
            DPoly::zero(),
            DPoly::constant(1.0),
            DPoly::zero(),
            DPoly::zero(),
        ],
        vec![
            DPoly::zero(),
            DPoly::zero(),
            DPoly::d(1.0),
            DPoly::zero(),
            DPoly::zero(),
        ],
        vec![
            DPoly::constant(-1.0),
            DPoly::d(1.0),
            DPoly::zero(),
            DPoly::constant(-1.0),
            DPoly::d(1.0),
        ],
        vec![
            DPoly::zero(),
            DPoly::zero(),
            DPoly::constant(1.0),
            DPoly::zero(),
            DPoly::zero(),
        ],
        vec![
            DPoly::zero(),
            DPoly::zero(),
            DPoly::d(1.0),
            DPoly::zero(),
            DPoly::zero(),
        ],
    ]);

    let k_sigma = nonlocal_inverse(&sbp, p.mu_nl, mode)?.scale(p.tau_d);
    let closure = block_diag(&[&id.scale(p.b_damp), &k_sigma]);
    let nonlocal_gram = h.add(&d.transpose().matmul(&h.matmul(&d)).scale(p.mu_nl));
    let gram = block_diag(&[&h.scale(p.b_damp), &nonlocal_gram.scale(p.tau_d)]);

    // formal P†S; P is formally self-adjoint
    let p_formal = block_diag(&[
        &id,
        &DPoly::from_coeffs(&[1.0, 0.0, -p.mu_nl]).to_mat(&sbp),
        &id,
    ]);
    let lagrange_kernel = h_times(&sbp, 3, &p_formal.matmul(&s_mat));
    let mut boundary_correction = Mat::zeros(3 * n, 3 * n);
    boundary_correction.set_block(
        n,
        n,
        &sbp.boundary_mat().matmul(&d).scale(p.mu_nl * p.e_mod),
    );
    let hamiltonian = block_diag(&[
        &h.scale(p.k_f),
        &nonlocal_gram.scale(p.e_mod),
        &h.scale(1.0 / p.rho_a),
    ]);

    let nodal_lu = Lu::factor(&nonlocal_op(&sbp, p.mu_nl, mode), "nonlocal operator")?;
    let ports = ImplicitPorts {
        sbp: sbp.clone(),
        p,
        mode,
        k_sigma,
        nodal_lu,
    };
    let c = libm::sqrt(p.e_mod / p.rho_a).max(1e-12);

    Ok(DescriptorParts {
        name: name_of("nanorod_implicit", mode),
        mode,
        fields: labels(&[("xi_w", "m"), ("xi_eps", "1"), ("xi_p", "kg/s")]),
        resistive_fields: labels(&[("f_d", "m/s"), ("f_sigma", "1/s")]),
        descriptor_e: p_mat.clone(),
        structure_j,
        dissipation_r: vec![0.0; 3],
        resistive_closure: Some(closure),
        resistive_gram: Some(gram),
        effort_map: s_mat.clone(),
        lagrange_s: s_mat,
        lagrange_p: p_mat.clone(),
        lagrange_kernel,
        boundary_correction,
        hamiltonian,
        state_map: Some(p_mat),
        fixed: fixed_if(mode, fixed_at(&[0, 1, 2], &ends(n), n)),
        default_dt: 0.5 * grid.spacing() / c,
        ports: Arc::new(ports),
        initializer: None,
        sbp,
    })
}

pub fn nanorod_implicit(
    params: &NanorodParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<PhDescriptor> {
    require("tau_d", params.tau_d, true)?;
    PhDescriptor::assemble(nanorod_implicit_parts(params, grid, mode)?)
}

struct ImplicitPorts {
    sbp: SbpSet,
    p: NanorodParams,
    mode: BoundaryMode,
    k_sigma: Mat,
    nodal_lu: Lu,
}

impl ImplicitPorts {
    fn velocity(&self, x: &[f64]) -> Vec<f64> {
        scaled(field(x, 2, self.sbp.len()), 1.0 / self.p.rho_a)
    }

    fn e_sigma(&self, v: &[f64]) -> Vec<f64> {
        self.k_sigma.matvec(&self.sbp.apply_d(v))
    }
}

impl PortModel for ImplicitPorts {
    fn ports(&self, x: &[f64], rate: &[f64]) -> PortSample {
        let n = self.sbp.len();
        let p = self.p;
        let v = self.velocity(x);
        let sigma = scaled(field(x, 1, n), p.e_mod);
        let es = self.e_sigma(&v);
        let des = self.sbp.apply_d(&es);
        let xi2 = field(x, 1, n).to_vec();
        let me = p.mu_nl * p.e_mod;
        PortVectors {
            flow: vec![v.clone(), v, scaled(&des, p.mu_nl / p.tau_d)],
            effort: vec![sigma, es.clone(), es],
            chi: vec![xi2.clone()],
            eps: vec![scaled(&self.sbp.apply_d(&xi2), me)],
            chi_rate: vec![field(rate, 1, n).to_vec()],
            eps_rate: vec![scaled(&self.sbp.apply_d(field(rate, 1, n)), me)],
            pairing: EnergyPairing::EpsRate,
        }
        .sample()
    }

    fn dissipation(&self, x: &[f64]) -> f64 {
        let v = self.velocity(x);
        let es = self.e_sigma(&v);
        let des = self.sbp.apply_d(&es);
        let s = &self.sbp;
        self.p.b_damp * s.inner(&v, &v)
            + (s.inner(&es, &es) + self.p.mu_nl * s.inner(&des, &des)) / self.p.tau_d
    }

    fn balance_terms(&self, x: &[f64], rate: &[f64]) -> Vec<BalanceTerm> {
        let n = self.sbp.len();
        let p = self.p;
        let s = &self.sbp;
        let d = s.d1();
        let v: Vec<f64> = x[2 * n..].iter().map(|q| q / p.rho_a).collect();
        let sigma: Vec<f64> = x[n..2 * n].iter().map(|e| p.e_mod * e).collect();
        // e_sigma from a fresh solve of (1 - mu D^2) e = tau_d D v
        let mut rhs: Vec<f64> = d.matvec(&v).iter().map(|f| p.tau_d * f).collect();
        if self.mode == BoundaryMode::Clamped {
            rhs[0] = 0.0;
            rhs[n - 1] = 0.0;
        }
        let es = self.nodal_lu.solve(&rhs);
        let des = d.matvec(&es);
        let dxi2_rate = d.matvec(&rate[n..2 * n]);
        let w = s.norm();
        let sq = |u: &[f64]| u.iter().zip(w).map(|(a, w)| a * a * w).sum::<f64>();
        vec![
            BalanceTerm {
                name: "sigma_v",
                kind: TermKind::Boundary,
                value: s.bracket(&sigma, &v),
            },
            BalanceTerm {
                name: "esigma_v",
                kind: TermKind::Boundary,
                value: s.bracket(&es, &v),
            },
            BalanceTerm {
                name: "esigma_desigma",
                kind: TermKind::Boundary,
                value: p.mu_nl / p.tau_d * s.bracket(&es, &des),
            },
            BalanceTerm {
                name: "muE_xi2_dxi2dot",
                kind: TermKind::Boundary,
                value: p.mu_nl * p.e_mod * s.bracket(&x[n..2 * n], &dxi2_rate),
            },
            BalanceTerm {
                name: "b_fd_sq",
                kind: TermKind::Dissipation,
                value: p.b_damp * sq(&v),
            },
            BalanceTerm {
                name: "esigma_sq",
                kind: TermKind::Dissipation,
                value: sq(&es) / p.tau_d,
            },
            BalanceTerm {
                name: "mu_desigma_sq",
                kind: TermKind::Dissipation,
                value: p.mu_nl * sq(&des) / p.tau_d,
            },
        ]
    }
}

/// Parts of the explicit descriptor with state
/// `(w, p, q, eps, N)`, `p = rhoA w_t`, `q = mu rhoA w_xt`, and an algebraic
/// fifth row enforcing `q = mu D p`.
pub fn nanorod_explicit_parts(
    params: &NanorodParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<DescriptorParts> {
    params.validate_common()?;
    require("mu_nl", params.mu_nl, true)?;
    let sbp = SbpSet::new(grid);
    let n = sbp.len();
    let p = *params;
    let r3 = p.tau_d * p.ea() + p.mu_nl * p.b_damp * p.b_damp;
    let q_coeffs = [
        p.k_f,
        1.0 / p.rho_a,
        1.0 / (p.mu_nl * p.rho_a),
        p.ea() + p.mu_nl * p.k_f,
        1.0,
    ];
    let q_mat = Mat::from_diag(
        &q_coeffs
            .iter()
            .flat_map(|&c| vec![c; n])
            .collect::<Vec<_>>(),
    );
    let e_mat = Mat::from_diag(
        &[1.0, 1.0, 1.0, 1.0, 0.0]
            .iter()
            .flat_map(|&c| vec![c; n])
            .collect::<Vec<_>>(),
    );
    let one = || DPoly::constant(1.0);
    let m_one = || DPoly::constant(-1.0);
    let z = DPoly::zero;
    let structure_j = BlockOp::from_rows(vec![
        vec![z(), one(), z(), z(), z()],
        vec![m_one(), z(), z(), z(), DPoly::d(1.0)],
        vec![z(), z(), z(), m_one(), one()],
        vec![z(), z(), one(), z(), z()],
        vec![z(), DPoly::d(1.0), m_one(), z(), z()],
    ]);
    let hamiltonian = h_times(&sbp, 5, &e_mat.matmul(&q_mat));

    let ports = ExplicitPorts {
        sbp: sbp.clone(),
        b2: p.b_damp * p.b_damp,
        r3,
        q_coeffs,
    };

    let init = {
        let sbp = sbp.clone();
        let lu = Lu::factor(
            &nonlocal_op(&sbp, p.mu_nl, BoundaryMode::Free),
            "nonlocal operator",
        )?;
        move |x: &[f64]| -> Vec<f64> {
            let mut out = x.to_vec();
            let d = sbp.d1();
            let q = scaled(&d.matvec(field(x, 1, n)), p.mu_nl);
            out[2 * n..3 * n].copy_from_slice(&q);
            let v = scaled(field(x, 1, n), 1.0 / p.rho_a);
            let dv = d.matvec(&v);
            let dw = d.matvec(field(x, 0, n));
            let eps = field(x, 3, n);
            let rhs: Vec<f64> = (0..n)
                .map(|i| {
                    (p.ea() + p.mu_nl * p.k_f) * eps[i] + r3 * dv[i]
                        - p.mu_nl * p.k_f * dw[i]
                        - p.mu_nl * p.b_damp * p.b_damp * dv[i]
                })
                .collect();
            out[4 * n..].copy_from_slice(&lu.solve(&rhs));
            out
        }
    };
    let c = libm::sqrt(p.ea() / p.rho_a).max(1e-12);

    Ok(DescriptorParts {
        name: name_of("nanorod_explicit", mode),
        mode,
        fields: labels(&[
            ("w", "m"),
            ("p", "kg/s"),
            ("q", "kg m/s"),
            ("eps", "1"),
            ("N", "N"),
        ]),
        resistive_fields: Vec::new(),
        descriptor_e: e_mat.clone(),
        structure_j,
        dissipation_r: vec![0.0, p.b_damp * p.b_damp, r3, 0.0, 0.0],
        resistive_closure: None,
        resistive_gram: None,
        effort_map: q_mat.clone(),
        lagrange_s: q_mat,
        lagrange_p: e_mat,
        lagrange_kernel: hamiltonian.clone(),
        boundary_correction: Mat::zeros(5 * n, 5 * n),
        hamiltonian,
        state_map: None,
        fixed: fixed_if(mode, fixed_at(&[0, 1], &ends(n), n)),
        default_dt: 0.5 * grid.spacing() / c,
        ports: Arc::new(ports),
        initializer: Some(Arc::new(init)),
        sbp,
    })
}

pub fn nanorod_explicit(
    params: &NanorodParams,
    grid: &Grid1D,
    mode: BoundaryMode,
) -> Result<PhDescriptor> {
    require("tau_d", params.tau_d, false)?;
    PhDescriptor::assemble(nanorod_explicit_parts(params, grid, mode)?)
}

struct ExplicitPorts {
    sbp: SbpSet,
    b2: f64,
    r3: f64,
    q_coeffs: [f64; 5],
}

impl ExplicitPorts {
    fn effort(&self, x: &[f64], k: usize) -> Vec<f64> {
        scaled(field(x, k, self.sbp.len()), self.q_coeffs[k])
    }
}

impl PortModel for ExplicitPorts {
    fn ports(&self, x: &[f64], _rate: &[f64]) -> PortSample {
        PortVectors {
            flow: vec![self.effort(x, 1)],
            effort: vec![self.effort(x, 4)],
            chi: Vec::new(),
            eps: Vec::new(),
            chi_rate: Vec::new(),
            eps_rate: Vec::new(),
            pairing: EnergyPairing::ChiRate,
        }
        .sample()
    }

    fn dissipation(&self, x: &[f64]) -> f64 {
        let v = self.effort(x, 1);
        let e3 = self.effort(x, 2);
        self.b2 * self.sbp.inner(&v, &v) + self.r3 * self.sbp.inner(&e3, &e3)
    }

    fn balance_terms(&self, x: &[f64], _rate: &[f64]) -> Vec<BalanceTerm> {
        let n = self.sbp.len();
        let w = self.sbp.norm();
        let v = &x[n..2 * n];
        let q = &x[2 * n..3 * n];
        let nn = &x[4 * n..];
        let (cv, cq) = (self.q_coeffs[1], self.q_coeffs[2]);
        let vn = cv * (v[n - 1] * nn[n - 1] - v[0] * nn[0]);
        let sum_sq =
            |u: &[f64], c: f64| u.iter().zip(w).map(|(a, w)| c * c * a * a * w).sum::<f64>();
        vec![
            BalanceTerm {
                name: "v_N",
                kind: TermKind::Boundary,
                value: vn,
            },
            BalanceTerm {
                name: "b2_v_sq",
                kind: TermKind::Dissipation,
                value: self.b2 * sum_sq(v, cv),
            },
            BalanceTerm {
                name: "r3_e3_sq",
                kind: TermKind::Dissipation,
                value: self.r3 * sum_sq(q, cq),
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbp::build_grid;

    #[test]
    fn explicit_descriptor_rank() {
        let g = build_grid(0.0, 1.0, 11).unwrap();
        let d = nanorod_explicit(&NanorodParams::default(), &g, BoundaryMode::Free).unwrap();
        assert_eq!(d.dim(), 55);
        let rank = (0..55).filter(|&i| d.descriptor_e()[(i, i)] != 0.0).count();
        assert_eq!(rank, 44);
    }

    #[test]
    fn local_limit_has_identity_state_map() {
        let g = build_grid(0.0, 1.0, 11).unwrap();
        let p = NanorodParams {
            mu_nl: 0.0,
            ..Default::default()
        };
        let d = nanorod_implicit(&p, &g, BoundaryMode::Free).unwrap();
        assert!(d.descriptor_e().sub(&Mat::identity(33)).max_abs() == 0.0);
    }
}
