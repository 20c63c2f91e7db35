//! Uniform grids and the diagonal-norm summation-by-parts first derivative.
//!
//! `D1` is the classical second-order operator: central differences in the
//! interior, one-sided first-order rows at the ends, and the trapezoidal norm
//! `H`. It satisfies `H D1 + (H D1)^T = diag(-1, 0, ..., 0, 1)` exactly, which is
//! the discrete integration-by-parts rule every balance in this crate rests on.
//! Higher derivatives are powers of `D1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat};

#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    x_left: f64,
    x_right: f64,
    n_nodes: usize,
    spacing: f64,
    nodes: Vec<f64>,
}

impl Grid1D {
    pub fn new(x_left: f64, x_right: f64, n_nodes: usize) -> Result<Self> {
        if !x_left.is_finite() || !x_right.is_finite() {
            return Err(Error::Config("grid bounds must be finite".into()));
        }
        if x_right <= x_left {
            return Err(Error::Config("grid requires x_right > x_left".into()));
        }
        if n_nodes < 3 {
            return Err(Error::Config("grid requires at least 3 nodes".into()));
        }
        let spacing = (x_right - x_left) / (n_nodes - 1) as f64;
        let nodes = (0..n_nodes)
            .map(|i| {
                if i == n_nodes - 1 {
                    x_right
                } else {
                    x_left + i as f64 * spacing
                }
            })
            .collect();
        Ok(Self {
            x_left,
            x_right,
            n_nodes,
            spacing,
            nodes,
        })
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn len(&self) -> usize {
        self.n_nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Samples `f` at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

/// Convenience wrapper around [`Grid1D::new`].
pub fn build_grid(x_left: f64, x_right: f64, n_nodes: usize) -> Result<Grid1D> {
    Grid1D::new(x_left, x_right, n_nodes)
}

#[derive(Clone, Debug)]
pub struct SbpSet {
    grid: Grid1D,
    d1: Mat,
    norm: Vec<f64>,
    boundary_form: Vec<f64>,
}

impl SbpSet {
    pub fn new(grid: &Grid1D) -> Self {
        let n = grid.len();
        let h = grid.spacing();
        let mut d1 = Mat::zeros(n, n);
        d1[(0, 0)] = -1.0 / h;
        d1[(0, 1)] = 1.0 / h;
        for i in 1..n - 1 {
            d1[(i, i - 1)] = -0.5 / h;
            d1[(i, i + 1)] = 0.5 / h;
        }
        d1[(n - 1, n - 2)] = -1.0 / h;
        d1[(n - 1, n - 1)] = 1.0 / h;

        let mut norm = vec![h; n];
        norm[0] = 0.5 * h;
        norm[n - 1] = 0.5 * h;

        let mut boundary_form = vec![0.0; n];
        boundary_form[0] = -1.0;
        boundary_form[n - 1] = 1.0;

        Self {
            grid: grid.clone(),
            d1,
            norm,
            boundary_form,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn d1(&self) -> &Mat {
        &self.d1
    }

    /// Quadrature weights (diagonal of `H`).
    pub fn norm(&self) -> &[f64] {
        &self.norm
    }

    pub fn norm_mat(&self) -> Mat {
        Mat::from_diag(&self.norm)
    }

    /// Diagonal of the boundary matrix `diag(-1, 0, ..., 0, 1)`.
    pub fn boundary_form(&self) -> &[f64] {
        &self.boundary_form
    }

    pub fn boundary_mat(&self) -> Mat {
        Mat::from_diag(&self.boundary_form)
    }

    /// `D1^k` for `k >= 0`.
    pub fn d_power(&self, k: usize) -> Mat {
        let mut m = Mat::identity(self.len());
        for _ in 0..k {
            m = self.d1.matmul(&m);
        }
        m
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter()
            .zip(v)
            .zip(&self.norm)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn h_norm(&self, u: &[f64]) -> f64 {
        libm::sqrt(self.inner(u, u))
    }

    /// Quadrature of a nodal field.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        dot(u, &self.norm)
    }

    pub fn trace_left(&self, u: &[f64]) -> f64 {
        u[0]
    }

    pub fn trace_right(&self, u: &[f64]) -> f64 {
        u[u.len() - 1]
    }

    pub fn dtrace_left(&self, u: &[f64]) -> f64 {
        dot(self.d1.row(0), u)
    }

    pub fn dtrace_right(&self, u: &[f64]) -> f64 {
        dot(self.d1.row(self.len() - 1), u)
    }

    /// `[u v]` evaluated between the endpoints: `u(b) v(b) - u(a) v(a)`.
    pub fn bracket(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.len();
        u[n - 1] * v[n - 1] - u[0] * v[0]
    }

    /// Residual of the SBP identity, `max |H D1 + (H D1)^T - B|`.
    pub fn sbp_identity_residual(&self) -> f64 {
        let q = self.d1.scale_rows_cols(&self.norm, &vec![1.0; self.len()]);
        let sym = q.add(&q.transpose());
        sym.sub(&self.boundary_mat()).max_abs()
    }

    pub fn apply_d(&self, u: &[f64]) -> Vec<f64> {
        self.d1.matvec(u)
    }
}

pub fn build_sbp(grid: &Grid1D) -> SbpSet {
    SbpSet::new(grid)
}

/// A square operator with its formal adjoint and the boundary bilinear form
/// closing the discrete Green identity
/// `<K u, v>_H = <u, K† v>_H + pairing(u, v)`.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub matrix: Mat,
    pub formal_adjoint: Mat,
    /// `pairing(u, v) = u^T boundary_pairing v`.
    pub boundary_pairing: Mat,
    norm: Vec<f64>,
}

impl DiscreteOperator {
    pub fn pairing(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, &self.boundary_pairing.matvec(v))
    }

    pub fn norm(&self) -> &[f64] {
        &self.norm
    }
}

/// `D1^k` with formal adjoint `(-D1)^k` and the telescoped boundary pairing
/// `sum_j (-1)^j [D^(k-1-j) u  D^j v]`.
pub fn compose_power(sbp: &SbpSet, k: usize) -> Result<DiscreteOperator> {
    if !(1..=4).contains(&k) {
        return Err(Error::Config(alloc::format!(
            "derivative power must be in 1..=4, got {k}"
        )));
    }
    let matrix = sbp.d_power(k);
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let formal_adjoint = matrix.scale(sign);
    let b = sbp.boundary_mat();
    let mut pairing = Mat::zeros(sbp.len(), sbp.len());
    for j in 0..k {
        let left = sbp.d_power(k - 1 - j).transpose();
        let right = sbp.d_power(j);
        let term = left.matmul(&b).matmul(&right);
        pairing = if j % 2 == 0 {
            pairing.add(&term)
        } else {
            pairing.sub(&term)
        };
    }
    Ok(DiscreteOperator {
        matrix,
        formal_adjoint,
        boundary_pairing: pairing,
        norm: sbp.norm().to_vec(),
    })
}

/// `|<K u, v>_H - <u, K† v>_H - pairing(u, v)|`.
pub fn green_residual(op: &DiscreteOperator, u: &[f64], v: &[f64]) -> Result<f64> {
    let n = op.matrix.cols();
    for (len, what) in [(u.len(), "green_residual u"), (v.len(), "green_residual v")] {
        if len != n {
            return Err(Error::Dimension {
                expected: n,
                got: len,
                context: what,
            });
        }
    }
    let ku = op.matrix.matvec(u);
    let kv = op.formal_adjoint.matvec(v);
    let w = &op.norm;
    let lhs: f64 = ku.iter().zip(v).zip(w).map(|((a, b), c)| a * b * c).sum();
    let rhs: f64 = u.iter().zip(&kv).zip(w).map(|((a, b), c)| a * b * c).sum();
    Ok((lhs - rhs - op.pairing(u, v)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        let g = build_grid(0.0, 1.0, 3).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.spacing(), 0.5);
        let g = build_grid(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.spacing(), 0.5);
        for (a, b) in g.nodes().iter().zip(g.nodes().iter().rev()) {
            assert_eq!(*a, -*b);
        }
        assert!(build_grid(0.0, 1.0, 2).is_err());
        assert!(build_grid(1.0, 1.0, 5).is_err());
        assert!(build_grid(0.0, f64::NAN, 5).is_err());
    }

    #[test]
    fn d1_is_exact_on_constants_and_linears() {
        let g = build_grid(0.0, 2.0, 17).unwrap();
        let s = build_sbp(&g);
        let c = s.apply_d(&[3.0; 17]);
        assert!(c.iter().all(|v| v.abs() <= 1e-13));
        let l = s.apply_d(g.nodes());
        assert!(l.iter().all(|v| (v - 1.0).abs() <= 1e-13));
    }

    #[test]
    fn sbp_identity_and_norm_weights() {
        for n in [3, 11, 51, 201] {
            let g = build_grid(-0.3, 1.7, n).unwrap();
            let s = build_sbp(&g);
            assert!(s.sbp_identity_residual() <= 1e-13);
            let total: f64 = s.norm().iter().sum();
            assert!((total - 2.0).abs() <= 1e-13 * 2.0);
            assert!(s.norm().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn first_power_green_identity_is_bracket() {
        let g = build_grid(0.0, 1.0, 21).unwrap();
        let s = build_sbp(&g);
        let u = g.sample(libm::exp);
        let v = g.sample(|x| libm::cos(3.0 * x));
        let lhs = s.inner(&s.apply_d(&u), &v) + s.inner(&u, &s.apply_d(&v));
        assert!((lhs - s.bracket(&u, &v)).abs() <= 1e-13);
    }

    #[test]
    fn second_power_green_on_trig_pair() {
        let g = build_grid(0.0, 1.0, 201).unwrap();
        let s = build_sbp(&g);
        let op = compose_power(&s, 2).unwrap();
        let u = g.sample(|x| libm::sin(core::f64::consts::PI * x));
        let v = g.sample(|x| libm::cos(core::f64::consts::PI * x));
        let scale = s.h_norm(&u) * s.h_norm(&v) * op.matrix.norm_inf();
        assert!(green_residual(&op, &u, &v).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn fourth_power_pairing_matches_dzektser_bracket() {
        // <D^4 u, v> - <u, D^4 v> = [D^3u v - D^2u Dv + Du D^2v - u D^3v]
        let g = build_grid(0.0, 1.0, 15).unwrap();
        let s = build_sbp(&g);
        let op = compose_power(&s, 4).unwrap();
        let u = g.sample(|x| 0.3 + x * x * x - libm::sin(2.0 * x));
        let v = g.sample(|x| libm::exp(-x) + 0.5 * x);
        let d = |w: &[f64], k| s.d_power(k).matvec(w);
        let expected = s.bracket(&d(&u, 3), &v) - s.bracket(&d(&u, 2), &d(&v, 1))
            + s.bracket(&d(&u, 1), &d(&v, 2))
            - s.bracket(&u, &d(&v, 3));
        let got = op.pairing(&u, &v);
        assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0));
    }

    #[test]
    fn compose_power_range_and_dimension_errors() {
        let s = build_sbp(&build_grid(0.0, 1.0, 5).unwrap());
        assert!(compose_power(&s, 0).is_err());
        assert!(compose_power(&s, 5).is_err());
        let op = compose_power(&s, 1).unwrap();
        assert_eq!(green_residual(&op, &[0.0; 5], &[0.0; 5]).unwrap(), 0.0);
        assert!(green_residual(&op, &[0.0; 4], &[0.0; 5]).is_err());
    }

    #[test]
    fn d1_converges_at_least_order_one_and_a_half() {
        let err = |n: usize| {
            let g = build_grid(0.0, 1.0, n).unwrap();
            let s = build_sbp(&g);
            let w = 2.0 * core::f64::consts::PI;
            let f = g.sample(|x| libm::sin(w * x));
            let df = g.sample(|x| w * libm::cos(w * x));
            crate::linalg::max_abs(&crate::linalg::sub_vec(&s.apply_d(&f), &df))
        };
        let rate = libm::log2(err(41) / err(81));
        assert!(rate >= 1.5, "observed max-norm rate {rate}");
    }
}
