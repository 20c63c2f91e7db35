//! Maps between the explicit and implicit beam representations.
//!
//! `G` sends the implicit Timoshenko state `(w, p_w, phi, p_phi)` to the
//! explicit one `(eps_w, p_w, eps_phi, p_phi, eps_wphi)`; `F` inverts it on
//! states with `H`-mean-zero displacement. Efforts travel the other way
//! through the formal adjoint `G†`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::blockop::{block_norm, h_adjoint, BlockOp, DPoly};
use crate::error::{Error, Result};
use crate::integrator::{consistent_init, left_null_space, simulate};
use crate::linalg::{sub_vec, Lu, Mat};
use crate::models::{
    eb_explicit_dae, eb_implicit_dae, g_reduced, g_timoshenko, structure_canonical,
    structure_eb_reduced_explicit, structure_timoshenko_explicit, timoshenko_explicit,
    timoshenko_implicit, BeamCoefficients, BeamParams,
};
use crate::sbp::{Grid1D, SbpSet};
use crate::BoundaryMode;

/// Nodes excluded at each end when checking operator identities entrywise.
pub const CLOSURE_MARGIN: usize = 4;

/// States on which a transform is invertible.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    All,
    /// The given field has zero `H`-weighted mean.
    MeanZero {
        field: usize,
    },
}

#[derive(Clone, Debug)]
pub struct StateTransform {
    pub name: &'static str,
    /// State map.
    pub forward: Mat,
    /// Contravariant effort map, `e_in = effort_map e_out`.
    pub effort_map: Mat,
    /// `forward^T H_out - H_in effort_map`; nonzero only near the ends.
    pub boundary_pairing: Mat,
    pub inverse: Option<Box<StateTransform>>,
    pub domain: Domain,
    pub in_fields: usize,
    pub out_fields: usize,
    sbp: SbpSet,
}

impl StateTransform {
    fn from_symbol(name: &'static str, sbp: &SbpSet, g: &BlockOp, domain: Domain) -> Self {
        Self {
            name,
            forward: g.to_mat(sbp),
            effort_map: g.formal_adjoint().to_mat(sbp),
            boundary_pairing: g.adjoint_defect(sbp),
            inverse: None,
            domain,
            in_fields: g.block_cols(),
            out_fields: g.block_rows(),
            sbp: sbp.clone(),
        }
    }

    pub fn sbp(&self) -> &SbpSet {
        &self.sbp
    }

    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z, self.forward.cols(), "transform input")?;
        Ok(self.forward.matvec(z))
    }

    pub fn apply_effort(&self, e: &[f64]) -> Result<Vec<f64>> {
        self.check(e, self.effort_map.cols(), "effort input")?;
        Ok(self.effort_map.matvec(e))
    }

    fn check(&self, v: &[f64], expected: usize, context: &'static str) -> Result<()> {
        if v.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: v.len(),
                context,
            });
        }
        Ok(())
    }

    /// Projection onto the domain, as a matrix on the input space.
    pub fn domain_projector(&self) -> Mat {
        let n = self.sbp.len();
        let mut p = Mat::identity(self.in_fields * n);
        if let Domain::MeanZero { field } = self.domain {
            p.set_block(field * n, field * n, &mean_zero_projector(&self.sbp));
        }
        p
    }

    pub fn project_domain(&self, z: &[f64]) -> Vec<f64> {
        let n = self.sbp.len();
        let mut out = z.to_vec();
        if let Domain::MeanZero { field } = self.domain {
            let block = &mut out[field * n..(field + 1) * n];
            let mean = self.sbp.integrate(block) / self.sbp.grid().length();
            block.iter_mut().for_each(|v| *v -= mean);
        }
        out
    }

    /// `|inverse(forward(z)) - z| / |z|` in the `H` norm, for `z` in the domain.
    pub fn left_round_trip(&self, z: &[f64]) -> Result<f64> {
        let inv = self
            .inverse
            .as_ref()
            .ok_or(Error::Config("transform has no inverse".into()))?;
        let z = self.project_domain(z);
        let back = inv.apply(&self.apply(&z)?)?;
        Ok(relative(&self.sbp, &sub_vec(&back, &z), &z))
    }

    /// `|forward(inverse(y)) - y| / |y|` for `y` in the range.
    pub fn right_round_trip(&self, y: &[f64]) -> Result<f64> {
        let inv = self
            .inverse
            .as_ref()
            .ok_or(Error::Config("transform has no inverse".into()))?;
        let there = self.apply(&inv.apply(y)?)?;
        Ok(relative(&self.sbp, &sub_vec(&there, y), y))
    }

    /// Duality defect `<G z, e>_H - <z, G† e>_H - z^T W e`, relative to
    /// `|G z| |e|`.
    pub fn effort_covariance(&self, z: &[f64], e: &[f64]) -> Result<f64> {
        let gz = self.apply(z)?;
        let gte = self.apply_effort(e)?;
        let h_out = block_norm(&self.sbp, self.out_fields);
        let h_in = block_norm(&self.sbp, self.in_fields);
        let lhs: f64 = gz
            .iter()
            .zip(e)
            .zip(&h_out)
            .map(|((a, b), w)| a * b * w)
            .sum();
        let rhs: f64 = z
            .iter()
            .zip(&gte)
            .zip(&h_in)
            .map(|((a, b), w)| a * b * w)
            .sum();
        let pairing: f64 = z
            .iter()
            .zip(self.boundary_pairing.matvec(e))
            .map(|(a, b)| a * b)
            .sum();
        let scale = (weighted_norm(&gz, &h_out) * weighted_norm(e, &h_out)).max(f64::MIN_POSITIVE);
        Ok((lhs - rhs - pairing).abs() / scale)
    }
}

fn weighted_norm(v: &[f64], w: &[f64]) -> f64 {
    libm::sqrt(v.iter().zip(w).map(|(a, b)| a * a * b).sum())
}

/// `|diff| / |reference|` in the block `H` norm; the plain norm of `diff`
/// when the reference vanishes.
pub fn relative(sbp: &SbpSet, diff: &[f64], reference: &[f64]) -> f64 {
    let fields = reference.len() / sbp.len().max(1);
    let w = block_norm(sbp, fields.max(1));
    let r = weighted_norm(reference, &w);
    let d = weighted_norm(diff, &w);
    if r == 0.0 {
        d
    } else {
        d / r
    }
}

/// `I - 1 1^T H / L`.
pub fn mean_zero_projector(sbp: &SbpSet) -> Mat {
    let n = sbp.len();
    let len = sbp.grid().length();
    let mut p = Mat::identity(n);
    for i in 0..n {
        for (j, w) in sbp.norm().iter().enumerate() {
            p[(i, j)] -= w / len;
        }
    }
    p
}

/// Mean-zero antiderivative: `a = A z` solves `D a + lambda y = z` with
/// `1^T H a = 0`, where `y^T D = 0`. Hence `D A z = z` on the range of `D`
/// and `A D = I - 1 1^T H / L`.
pub fn antiderivative(sbp: &SbpSet) -> Result<Mat> {
    let n = sbp.len();
    let y = left_null_space(sbp.d1(), 1e-12);
    if y.len() != 1 {
        return Err(Error::Singular {
            context: "derivative null space",
            min_pivot: 0.0,
            cond: f64::INFINITY,
        });
    }
    let mut bordered = Mat::zeros(n + 1, n + 1);
    bordered.set_block(0, 0, sbp.d1());
    for i in 0..n {
        bordered[(i, n)] = y[0][i];
        bordered[(n, i)] = sbp.norm()[i];
    }
    let lu = Lu::factor(&bordered, "bordered antiderivative")?;
    let mut rhs = Mat::zeros(n + 1, n);
    for i in 0..n {
        rhs[(i, i)] = 1.0;
    }
    Ok(lu.solve_mat(&rhs).block(0, 0, n, n))
}

/// `G` with its inverse `F` attached.
pub fn build_g_timoshenko(grid: &Grid1D) -> Result<StateTransform> {
    let sbp = SbpSet::new(grid);
    let mut g =
        StateTransform::from_symbol("G", &sbp, &g_timoshenko(), Domain::MeanZero { field: 0 });
    g.inverse = Some(Box::new(f_timoshenko(&sbp)?));
    Ok(g)
}

/// `F = (A z_1, z_2, z_1 - z_5, z_4)`, with `G` attached as its inverse.
pub fn build_f_timoshenko(grid: &Grid1D) -> Result<StateTransform> {
    let g = build_g_timoshenko(grid)?;
    let mut f = *g.inverse.clone().expect("attached above");
    let mut g_plain = g;
    g_plain.inverse = None;
    f.inverse = Some(Box::new(g_plain));
    Ok(f)
}

fn f_timoshenko(sbp: &SbpSet) -> Result<StateTransform> {
    let n = sbp.len();
    let a = antiderivative(sbp)?;
    let id = Mat::identity(n);
    let mut f = Mat::zeros(4 * n, 5 * n);
    f.set_block(0, 0, &a);
    f.set_block(n, n, &id);
    f.set_block(2 * n, 0, &id);
    f.set_block(2 * n, 4 * n, &id.scale(-1.0));
    f.set_block(3 * n, 3 * n, &id);
    let (h4, h5) = (block_norm(sbp, 4), block_norm(sbp, 5));
    let effort_map = h_adjoint(&f, &h4, &h5);
    Ok(StateTransform {
        name: "F",
        boundary_pairing: Mat::zeros(5 * n, 4 * n),
        forward: f,
        effort_map,
        inverse: None,
        domain: Domain::All,
        in_fields: 5,
        out_fields: 4,
        sbp: sbp.clone(),
    })
}

/// `G_r : (w, p_w) -> (D w, D^2 w, p_w)`.
pub fn build_g_reduced(grid: &Grid1D) -> StateTransform {
    let sbp = SbpSet::new(grid);
    StateTransform::from_symbol("G_r", &sbp, &g_reduced(), Domain::MeanZero { field: 0 })
}

/// Implicit Timoshenko `S`, written out entry by entry.
pub fn s_timoshenko_closed_form(k: &BeamCoefficients) -> BlockOp {
    let z = DPoly::zero;
    BlockOp::from_rows(vec![
        vec![DPoly::d2(-(k.t0 + k.akg)), z(), DPoly::d(k.akg), z()],
        vec![z(), DPoly::constant(1.0 / k.rho_a), z(), z()],
        vec![
            DPoly::d(-k.akg),
            z(),
            DPoly::from_coeffs(&[k.akg, 0.0, -k.ei]),
            z(),
        ],
        vec![z(), z(), z(), DPoly::constant(1.0 / k.rho_i)],
    ])
}

/// `diag(I, I, I, 0, 0)`.
pub fn pi_explicit() -> BlockOp {
    BlockOp::diag(&[1.0, 1.0, 1.0, 0.0, 0.0])
}

/// Closed form of `F Pi^E G`: keeps `(w, p_w)`, sets `phi = D w`, drops `p_phi`.
pub fn pi_implicit_closed_form() -> BlockOp {
    let z = DPoly::zero;
    let one = || DPoly::constant(1.0);
    BlockOp::from_rows(vec![
        vec![one(), z(), z(), z()],
        vec![z(), one(), z(), z()],
        vec![DPoly::d(1.0), z(), z(), z()],
        vec![z(), z(), z(), z()],
    ])
}

/// Entrywise residual of an operator identity, split into rows and columns
/// away from the boundary closures and the remainder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityResidual {
    pub interior: f64,
    pub boundary: f64,
    /// `max |entry|` of the reference operator.
    pub scale: f64,
}

impl IdentityResidual {
    pub fn relative(&self) -> f64 {
        self.interior / self.scale.max(f64::MIN_POSITIVE)
    }
}

fn interior_mask(fields: usize, n: usize) -> Vec<bool> {
    (0..fields * n)
        .map(|i| {
            let node = i % n;
            node >= CLOSURE_MARGIN && node + CLOSURE_MARGIN < n
        })
        .collect()
}

/// Compares `lhs` with `rhs` on interior rows and columns.
pub fn identity_residual(lhs: &Mat, rhs: &Mat, n: usize) -> Result<IdentityResidual> {
    if lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols() {
        return Err(Error::Dimension {
            expected: rhs.rows() * rhs.cols(),
            got: lhs.rows() * lhs.cols(),
            context: "operator identity",
        });
    }
    let rows = interior_mask(lhs.rows() / n, n);
    let cols = interior_mask(lhs.cols() / n, n);
    let (mut interior, mut boundary) = (0.0f64, 0.0f64);
    for i in 0..lhs.rows() {
        for j in 0..lhs.cols() {
            let r = (lhs[(i, j)] - rhs[(i, j)]).abs();
            if rows[i] && cols[j] {
                interior = interior.max(r);
            } else {
                boundary = boundary.max(r);
            }
        }
    }
    Ok(IdentityResidual {
        interior,
        boundary,
        scale: rhs.max_abs(),
    })
}

/// `G J^I G† = J^E`.
pub fn verify_j_conjugation(g: &StateTransform, j_i: &Mat, j_e: &Mat) -> Result<IdentityResidual> {
    if j_i.rows() != g.forward.cols() || j_e.rows() != g.forward.rows() {
        return Err(Error::Dimension {
            expected: g.forward.cols(),
            got: j_i.rows(),
            context: "structure conjugation",
        });
    }
    let lhs = g.forward.matmul(j_i).matmul(&g.effort_map);
    identity_residual(&lhs, j_e, g.sbp.len())
}

/// `G† S^E G = S^I†` and `G† P^E F† = P^I† Pi_dom`, where `Pi_dom`
/// projects onto the domain of `G`.
pub fn verify_lagrange_conjugation(
    g: &StateTransform,
    f: &StateTransform,
    s_e: &BlockOp,
    p_e: &BlockOp,
    s_i: &BlockOp,
    p_i: &BlockOp,
) -> Result<(IdentityResidual, IdentityResidual)> {
    let sbp = &g.sbp;
    let n = sbp.len();
    let dims_ok = s_e.block_rows() == g.out_fields
        && p_e.block_rows() == g.out_fields
        && s_i.block_rows() == g.in_fields
        && p_i.block_rows() == g.in_fields
        && f.forward.rows() == g.forward.cols();
    if !dims_ok {
        return Err(Error::Dimension {
            expected: g.out_fields,
            got: s_e.block_rows(),
            context: "Lagrange conjugation",
        });
    }
    let s_lhs = g
        .effort_map
        .matmul(&s_e.to_mat(sbp).transpose())
        .matmul(&g.forward);
    let s_res = identity_residual(&s_lhs, &s_i.formal_adjoint().to_mat(sbp), n)?;
    let p_lhs = g
        .effort_map
        .matmul(&p_e.to_mat(sbp).transpose())
        .matmul(&f.effort_map);
    let p_rhs = p_i
        .formal_adjoint()
        .to_mat(sbp)
        .matmul(&g.domain_projector());
    let p_res = identity_residual(&p_lhs, &p_rhs, n)?;
    Ok((s_res, p_res))
}

pub struct Projectors {
    pub pi_e: Mat,
    pub pi_i_closed: Mat,
    pub pi_i_product: Mat,
    domain: Mat,
    n: usize,
}

impl Projectors {
    /// Closed form against `F Pi^E G`, both restricted to the domain of `G`.
    pub fn discrepancy(&self) -> Result<IdentityResidual> {
        identity_residual(
            &self.pi_i_product,
            &self.pi_i_closed.matmul(&self.domain),
            self.n,
        )
    }

    /// `max |Pi^E Pi^E - Pi^E|`.
    pub fn idempotency_defect(&self) -> f64 {
        self.pi_e.matmul(&self.pi_e).sub(&self.pi_e).max_abs()
    }
}

pub fn build_projectors(grid: &Grid1D) -> Result<Projectors> {
    let g = build_g_timoshenko(grid)?;
    let sbp = g.sbp.clone();
    let f = g.inverse.as_ref().expect("G carries F");
    let pi_e = pi_explicit().to_mat(&sbp);
    let pi_i_product = f.forward.matmul(&pi_e).matmul(&g.forward);
    Ok(Projectors {
        pi_e,
        pi_i_closed: pi_implicit_closed_form().to_mat(&sbp),
        pi_i_product,
        domain: g.domain_projector(),
        n: sbp.len(),
    })
}

/// Every operator identity of the beam transforms at one parameter set.
#[derive(Clone, Debug)]
pub struct TransformReport {
    pub j_timoshenko: IdentityResidual,
    pub j_reduced: IdentityResidual,
    pub s_conjugation: IdentityResidual,
    pub p_conjugation: IdentityResidual,
    pub projector: IdentityResidual,
    pub spacing: f64,
}

impl TransformReport {
    /// `(name, interior residual, tolerance)` for each identity.
    pub fn rows(&self) -> Vec<(&'static str, f64, f64)> {
        let h = self.spacing;
        vec![
            ("G J^I G' = J^E", self.j_timoshenko.interior, 1e-11 / h),
            (
                "G_r J_r^I G_r' = J_r^E",
                self.j_reduced.interior,
                1e-10 / (h * h),
            ),
            (
                "G' S^E G = S^I'",
                self.s_conjugation.interior,
                1e-10 / (h * h),
            ),
            (
                "G' P^E F' = P^I'",
                self.p_conjugation.interior,
                1e-10 / (h * h),
            ),
            ("Pi^I = F Pi^E G", self.projector.interior, 1e-10 / h),
        ]
    }

    pub fn passed(&self) -> bool {
        self.rows().iter().all(|(_, r, tol)| r <= tol)
    }
}

pub fn verify_transforms(params: &BeamParams, grid: &Grid1D) -> Result<TransformReport> {
    params.validate()?;
    let k = params.coefficients();
    let g = build_g_timoshenko(grid)?;
    let sbp = g.sbp.clone();
    let f = g.inverse.as_deref().expect("G carries F");
    let j_timoshenko = verify_j_conjugation(
        &g,
        &structure_canonical(2).to_mat(&sbp),
        &structure_timoshenko_explicit().to_mat(&sbp),
    )?;
    let gr = build_g_reduced(grid);
    let j_reduced = verify_j_conjugation(
        &gr,
        &structure_canonical(1).to_mat(&sbp),
        &structure_eb_reduced_explicit().to_mat(&sbp),
    )?;
    let (s_conjugation, p_conjugation) = verify_lagrange_conjugation(
        &g,
        f,
        &BlockOp::diag(&k.q_explicit()),
        &BlockOp::identity(5),
        &s_timoshenko_closed_form(&k),
        &BlockOp::identity(4),
    )?;
    let projector = build_projectors(grid)?.discrepancy()?;
    Ok(TransformReport {
        j_timoshenko,
        j_reduced,
        s_conjugation,
        p_conjugation,
        projector,
        spacing: grid.spacing(),
    })
}

pub const DIAGRAM_COLUMNS: [&str; 5] = [
    "timoshenko_g",
    "timoshenko_f",
    "euler_bernoulli_g",
    "euler_bernoulli_f",
    "energy",
];

/// Pairwise discrepancies along both routes of the beam diagram.
#[derive(Clone, Debug, Default)]
pub struct DiagramReport {
    pub times: Vec<f64>,
    /// One row per output time, columns as in [`DIAGRAM_COLUMNS`].
    pub rows: Vec<[f64; 5]>,
}

impl DiagramReport {
    pub fn max(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter().copied())
            .fold(0.0, f64::max)
    }

    pub fn column_max(&self, c: usize) -> f64 {
        self.rows.iter().map(|r| r[c]).fold(0.0, f64::max)
    }
}

/// Runs the explicit and implicit Timoshenko beams and both constrained
/// Euler-Bernoulli beams from one implicit state `z0 = (w, p_w, phi,
/// p_phi)` (free ends) and compares them through `G`, `F`, `Pi^E`, `Pi^I`.
///
/// `z0` should have mean-zero `w` and `phi = D w`; the constrained runs
/// start from `Pi^I z0` and `Pi^E G z0` after consistent initialization.
pub fn verify_diagram(
    params: &BeamParams,
    grid: &Grid1D,
    z0: &[f64],
    t_final: f64,
    dt: f64,
) -> Result<DiagramReport> {
    let mode = BoundaryMode::Free;
    let g = build_g_timoshenko(grid)?;
    let f = g.inverse.as_deref().expect("G carries F");
    let sbp = g.sbp.clone();
    let n = sbp.len();
    if z0.len() != 4 * n {
        return Err(Error::Dimension {
            expected: 4 * n,
            got: z0.len(),
            context: "diagram initial state",
        });
    }
    let pi = build_projectors(grid)?;

    let sys_a = timoshenko_explicit(params, grid, mode)?;
    let sys_b = timoshenko_implicit(params, grid, mode)?;
    let sys_c = eb_explicit_dae(params, grid, mode)?;
    let sys_d = eb_implicit_dae(params, grid, mode)?;

    let zb0 = z0.to_vec();
    let za0 = g.apply(&zb0)?;
    let zd0 = consistent_init(&sys_d, &pi.pi_i_closed.matvec(&zb0))?;
    let zc0 = consistent_init(&sys_c, &pi.pi_e.matvec(&za0))?;

    let ta = simulate(&sys_a, &za0, t_final, dt)?;
    let tb = simulate(&sys_b, &zb0, t_final, dt)?;
    let tc = simulate(&sys_c, &zc0, t_final, dt)?;
    let td = simulate(&sys_d, &zd0, t_final, dt)?;

    let energy = |a: f64, b: f64| {
        let s = a.abs().max(b.abs());
        if s == 0.0 {
            0.0
        } else {
            (a - b).abs() / s
        }
    };
    let mut report = DiagramReport::default();
    for (k, &t) in ta.times.iter().enumerate() {
        let (za, zb, zc, zd) = (&ta.states[k], &tb.states[k], &tc.states[k], &td.states[k]);
        let top_g = relative(&sbp, &sub_vec(&g.apply(zb)?, za), za);
        let zb_dom = g.project_domain(zb);
        let top_f = relative(&sbp, &sub_vec(&f.apply(za)?, &zb_dom), &zb_dom);
        let pc = pi.pi_e.matvec(zc);
        let bottom_g = relative(&sbp, &sub_vec(&pi.pi_e.matvec(&g.apply(zd)?), &pc), &pc);
        let pd = pi.pi_i_closed.matvec(&g.project_domain(zd));
        let bottom_f = relative(
            &sbp,
            &sub_vec(&pi.pi_i_closed.matvec(&f.apply(zc)?), &pd),
            &pd,
        );
        let e_top = energy(sys_a.eval_hamiltonian(za)?, sys_b.eval_hamiltonian(zb)?);
        let e_bottom = energy(sys_c.eval_hamiltonian(zc)?, sys_d.eval_hamiltonian(zd)?);
        report.times.push(t);
        report
            .rows
            .push([top_g, top_f, bottom_g, bottom_f, e_top.max(e_bottom)]);
    }
    Ok(report)
}

/// Admissible diagram start: mean-zero `w`, `phi = D w`, the given momenta.
pub fn admissible_state(grid: &Grid1D, w: &[f64], p_w: &[f64], p_phi: &[f64]) -> Vec<f64> {
    let sbp = SbpSet::new(grid);
    let n = sbp.len();
    let len = grid.length();
    let mean = sbp.integrate(w) / len;
    let w0: Vec<f64> = w.iter().map(|v| v - mean).collect();
    let phi = sbp.apply_d(&w0);
    let mut z = Vec::with_capacity(4 * n);
    z.extend_from_slice(&w0);
    z.extend_from_slice(p_w);
    z.extend_from_slice(&phi);
    z.extend_from_slice(p_phi);
    z
}
