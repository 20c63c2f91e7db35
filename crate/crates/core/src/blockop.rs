//! Block operators whose entries are constant-coefficient polynomials in `D1`.
//!
//! Every differential operator in the shipped models has this form, so formal
//! adjoints (`D -> -D`, blocks transposed) and the boundary pairings closing
//! the Green identity can be computed symbolically and then assembled.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Mat;
use crate::sbp::SbpSet;

/// `sum_k coeffs[k] * D1^k`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DPoly {
    coeffs: Vec<f64>,
}

impl DPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0)
    }

    /// `c * D1^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self { coeffs }.trimmed()
    }

    pub fn d(c: f64) -> Self {
        Self::monomial(c, 1)
    }

    pub fn d2(c: f64) -> Self {
        Self::monomial(c, 2)
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        Self {
            coeffs: coeffs.to_vec(),
        }
        .trimmed()
    }

    fn trimmed(mut self) -> Self {
        while matches!(self.coeffs.last(), Some(&c) if c == 0.0) {
            self.coeffs.pop();
        }
        self
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &DPoly) -> DPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs: Vec<f64> = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0)
                    + other.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        DPoly { coeffs }.trimmed()
    }

    pub fn scale(&self, s: f64) -> DPoly {
        DPoly {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
        .trimmed()
    }

    /// Operator composition; powers of a single `D1` commute.
    pub fn mul(&self, other: &DPoly) -> DPoly {
        if self.is_zero() || other.is_zero() {
            return DPoly::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        DPoly { coeffs }.trimmed()
    }

    /// Formal adjoint: `D1^k -> (-D1)^k`.
    pub fn adjoint(&self) -> DPoly {
        DPoly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 0 { *c } else { -*c })
                .collect(),
        }
        .trimmed()
    }

    pub fn to_mat(&self, sbp: &SbpSet) -> Mat {
        let n = sbp.len();
        let mut acc = Mat::zeros(n, n);
        // Horner: c0 + D (c1 + D (c2 + ...))
        for &c in self.coeffs.iter().rev() {
            acc = sbp.d1().matmul(&acc);
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        acc
    }

    /// Matrix `P` with `u^T P v = <K u, v>_H - <u, K† v>_H` for this `K`.
    pub fn pairing_mat(&self, sbp: &SbpSet) -> Mat {
        let n = sbp.len();
        let mut out = Mat::zeros(n, n);
        for (k, &c) in self.coeffs.iter().enumerate() {
            if k == 0 || c == 0.0 {
                continue;
            }
            out = out.add(&power_pairing(sbp, k).scale(c));
        }
        out
    }
}

/// Telescoped pairing of `D1^k`: `sum_j (-1)^j D^(k-1-j)^T B D^j`.
pub(crate) fn power_pairing(sbp: &SbpSet, k: usize) -> Mat {
    let b = sbp.boundary_mat();
    let n = sbp.len();
    let mut out = Mat::zeros(n, n);
    for j in 0..k {
        let term = sbp
            .d_power(k - 1 - j)
            .transpose()
            .matmul(&b)
            .matmul(&sbp.d_power(j));
        out = if j % 2 == 0 {
            out.add(&term)
        } else {
            out.sub(&term)
        };
    }
    out
}

/// A `rows x cols` array of [`DPoly`] blocks, each acting on one nodal field.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOp {
    rows: usize,
    cols: usize,
    entries: Vec<DPoly>,
}

impl BlockOp {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![DPoly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut op = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            op.set(i, i, DPoly::constant(v));
        }
        op
    }

    /// Builds from a row-major table of polynomials.
    pub fn from_rows(rows: Vec<Vec<DPoly>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged block rows");
        Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn block_rows(&self) -> usize {
        self.rows
    }

    pub fn block_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &DPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: DPoly) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn add(&self, other: &BlockOp) -> BlockOp {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        BlockOp {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> BlockOp {
        BlockOp {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|p| p.scale(s)).collect(),
        }
    }

    pub fn compose(&self, other: &BlockOp) -> BlockOp {
        assert_eq!(self.cols, other.rows, "block inner dimensions differ");
        let mut out = BlockOp::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = DPoly::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn formal_adjoint(&self) -> BlockOp {
        let mut out = BlockOp::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).adjoint());
            }
        }
        out
    }

    pub fn to_mat(&self, sbp: &SbpSet) -> Mat {
        let n = sbp.len();
        let mut m = Mat::zeros(self.rows * n, self.cols * n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let p = self.get(i, j);
                if !p.is_zero() {
                    m.set_block(i * n, j * n, &p.to_mat(sbp));
                }
            }
        }
        m
    }

    /// `K^T H - H K†`, assembled from the telescoped boundary pairings.
    /// Its `(i, j)` block is the pairing of block `K_ji`.
    pub fn adjoint_defect(&self, sbp: &SbpSet) -> Mat {
        let n = sbp.len();
        let mut m = Mat::zeros(self.cols * n, self.rows * n);
        for i in 0..self.cols {
            for j in 0..self.rows {
                let p = self.get(j, i);
                if p.degree().unwrap_or(0) > 0 {
                    m.set_block(i * n, j * n, &p.pairing_mat(sbp));
                }
            }
        }
        m
    }

    /// True when every block of `self + self†` vanishes identically.
    pub fn is_formally_skew(&self) -> bool {
        self.rows == self.cols
            && self
                .add(&self.formal_adjoint())
                .entries
                .iter()
                .all(|p| p.coeffs.iter().all(|c| c.abs() <= 1e-14 * (1.0 + c.abs())))
    }
}

/// Block-diagonal `H` weights for `fields` copies of the norm.
pub fn block_norm(sbp: &SbpSet, fields: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(fields * sbp.len());
    for _ in 0..fields {
        w.extend_from_slice(sbp.norm());
    }
    w
}

/// Exact `H`-adjoint `H^-1 K^T H` of an assembled block matrix.
pub fn h_adjoint(k: &Mat, row_norm: &[f64], col_norm: &[f64]) -> Mat {
    let inv: Vec<f64> = col_norm.iter().map(|w| 1.0 / w).collect();
    k.transpose().scale_rows_cols(&inv, row_norm)
}
