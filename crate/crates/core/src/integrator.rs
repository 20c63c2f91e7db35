//! Implicit midpoint integration of linear descriptor systems.
//!
//! For `E x' = A x` one step solves `(E/dt - A/2) x1 = (E/dt + A/2) x0`.
//! Evaluating ports and losses at the midpoint with the rate `(x1 - x0)/dt`
//! makes every quadratic power balance an exact discrete identity.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::descriptor::PhDescriptor;
use crate::error::{Error, Result};
use crate::linalg::{dot, Lu, Mat};

/// One ledger row, evaluated over the step ending at `t`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub h: f64,
    pub dh_dt: f64,
    pub boundary_power: f64,
    pub boundary_energy_rate: f64,
    pub dissipation: f64,
    pub residual: f64,
}

impl LedgerRow {
    /// Magnitude against which the residual is judged.
    pub fn scale(&self) -> f64 {
        self.h
            .abs()
            .max(self.dh_dt.abs())
            .max(self.boundary_power.abs())
            .max(self.boundary_energy_rate.abs())
            .max(self.dissipation.abs())
    }

    pub fn relative_residual(&self) -> f64 {
        let s = self.scale();
        if s == 0.0 {
            self.residual.abs()
        } else {
            self.residual.abs() / s
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn max_relative_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(LedgerRow::relative_residual)
            .fold(0.0, f64::max)
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.residual.abs())
            .fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub efforts: Vec<Vec<f64>>,
    pub ledger: EnergyLedger,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }
}

/// Cached midpoint stepper for one `(descriptor, dt)` pair.
#[derive(Clone, Debug)]
pub struct Midpoint<'a> {
    desc: &'a PhDescriptor,
    dt: f64,
    free: Vec<usize>,
    lu: Lu,
    rhs: Mat,
}

impl<'a> Midpoint<'a> {
    pub fn new(desc: &'a PhDescriptor, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let free = desc.free_dofs();
        let e = desc.descriptor_e().select(&free, &free).scale(1.0 / dt);
        let a = desc.generator().select(&free, &free).scale(0.5);
        let lu = Lu::factor(&e.sub(&a), "midpoint pencil")?;
        Ok(Self {
            desc,
            dt,
            free,
            lu,
            rhs: e.add(&a),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Pivot-ratio condition estimate of the shifted pencil.
    pub fn condition_estimate(&self) -> f64 {
        self.lu.condition_estimate()
    }

    pub fn step(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.desc.dim() {
            return Err(Error::Dimension {
                expected: self.desc.dim(),
                got: x.len(),
                context: "state",
            });
        }
        let xf: Vec<f64> = self.free.iter().map(|&i| x[i]).collect();
        let yf = self.lu.solve(&self.rhs.matvec(&xf));
        let mut y = vec![0.0; x.len()];
        for (k, &i) in self.free.iter().enumerate() {
            y[i] = yf[k];
        }
        Ok(y)
    }
}

/// One midpoint step without caching.
pub fn step_midpoint(desc: &PhDescriptor, x: &[f64], dt: f64) -> Result<Vec<f64>> {
    Midpoint::new(desc, dt)?.step(x)
}

/// Ledger row for the step `x0 -> x1`.
pub fn ledger_row(desc: &PhDescriptor, x0: &[f64], x1: &[f64], t: f64, dt: f64) -> LedgerRow {
    let mid: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| 0.5 * (a + b)).collect();
    let rate: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| (b - a) / dt).collect();
    let m = desc.hamiltonian_kernel();
    let h = 0.5 * dot(x1, &m.matvec(x1));
    // (H(x1) - H(x0)) / dt, factored to avoid cancellation
    let dh_dt = dot(&rate, &m.matvec(&mid));
    let ports = desc.ports().ports(&mid, &rate);
    let boundary_power = ports.power();
    let boundary_energy_rate = ports.energy_rate();
    let dissipation = desc.ports().dissipation(&mid);
    LedgerRow {
        t,
        h,
        dh_dt,
        boundary_power,
        boundary_energy_rate,
        dissipation,
        residual: dh_dt - boundary_power - boundary_energy_rate + dissipation,
    }
}

/// Left null space of `m` (vectors `z` with `z^T m = 0`), by Gauss-Jordan
/// elimination of `m^T` with partial pivoting.
pub fn left_null_space(m: &Mat, rel_tol: f64) -> Vec<Vec<f64>> {
    let mut a = m.transpose();
    let (rows, cols) = (a.rows(), a.cols());
    let tol = rel_tol * a.max_abs().max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, val) = (r..rows)
            .map(|i| (i, a[(i, c)].abs()))
            .fold(
                (r, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if val <= tol {
            continue;
        }
        if p != r {
            for j in 0..cols {
                let tmp = a[(r, j)];
                a[(r, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
        }
        let inv = 1.0 / a[(r, c)];
        for j in 0..cols {
            a[(r, j)] *= inv;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        a[(i, j)] -= f * a[(r, j)];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    (0..cols)
        .filter(|&c| !is_pivot[c])
        .map(|f| {
            let mut z = vec![0.0; cols];
            z[f] = 1.0;
            for (k, &pc) in pivots.iter().enumerate() {
                z[pc] = -a[(k, f)];
            }
            z
        })
        .collect()
}

/// Projects `x0` onto the constraint manifold of the descriptor.
///
/// Fixed unknowns are zeroed. For a singular `E` the constraints `Z A x = 0`
/// (with `Z E = 0`) are solved for the unknowns whose `E` column vanishes,
/// leaving every other component untouched. Systems registering their own
/// initializer (hidden constraints of higher index) use that instead.
pub fn consistent_init(desc: &PhDescriptor, x0: &[f64]) -> Result<Vec<f64>> {
    if x0.len() != desc.dim() {
        return Err(Error::Dimension {
            expected: desc.dim(),
            got: x0.len(),
            context: "initial state",
        });
    }
    let mut x = x0.to_vec();
    for &i in desc.fixed() {
        x[i] = 0.0;
    }
    if let Some(init) = desc.initializer() {
        let mut y = init(&x);
        for &i in desc.fixed() {
            y[i] = 0.0;
        }
        return Ok(y);
    }
    let free = desc.free_dofs();
    let e = desc.descriptor_e().select(&free, &free);
    let z = left_null_space(&e, 1e-12);
    if z.is_empty() {
        return Ok(x);
    }
    let a = desc.generator().select(&free, &free);
    let alg: Vec<usize> = (0..free.len())
        .filter(|&j| (0..free.len()).all(|i| e[(i, j)] == 0.0))
        .collect();
    if alg.len() != z.len() {
        return Err(Error::Singular {
            context: "constraint block is not square",
            min_pivot: 0.0,
            cond: f64::INFINITY,
        });
    }
    let mut is_alg = vec![false; free.len()];
    for &j in &alg {
        is_alg[j] = true;
    }
    let xf: Vec<f64> = free.iter().map(|&i| x[i]).collect();
    let nc = z.len();
    let mut ca = Mat::zeros(nc, nc);
    let mut rhs = vec![0.0; nc];
    for (r, zr) in z.iter().enumerate() {
        let row = a.tmatvec(zr);
        for (k, &j) in alg.iter().enumerate() {
            ca[(r, k)] = row[j];
        }
        rhs[r] = -(0..free.len())
            .filter(|&j| !is_alg[j])
            .map(|j| row[j] * xf[j])
            .sum::<f64>();
    }
    let lu = Lu::factor(&ca, "constraint block")?;
    let sol = lu.solve(&rhs);
    for (k, &j) in alg.iter().enumerate() {
        x[free[j]] = sol[k];
    }
    Ok(x)
}

/// Largest residual of the algebraic rows (zero rows of `E`) at `x`.
pub fn algebraic_residual(desc: &PhDescriptor, x: &[f64]) -> f64 {
    let free = desc.free_dofs();
    let e = desc.descriptor_e();
    let ax = desc.generator().matvec(x);
    free.iter()
        .filter(|&&i| free.iter().all(|&j| e[(i, j)] == 0.0))
        .map(|&i| ax[i].abs())
        .fold(0.0, f64::max)
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates to `t_final`, returning whatever was computed and the error
/// that stopped the run, if any.
pub fn simulate_partial(
    desc: &PhDescriptor,
    x0: &[f64],
    t_final: f64,
    dt: f64,
) -> (Trajectory, Option<Error>) {
    let mut traj = Trajectory::default();
    if !(t_final.is_finite() && t_final >= 0.0) {
        return (
            traj,
            Some(Error::Config(format!(
                "t_final must be >= 0, got {t_final}"
            ))),
        );
    }
    let stepper = match Midpoint::new(desc, dt) {
        Ok(s) => s,
        Err(e) => return (traj, Some(e)),
    };
    let x = match consistent_init(desc, x0) {
        Ok(x) => x,
        Err(e) => return (traj, Some(e)),
    };
    let steps = libm::round(t_final / dt) as usize;
    traj.times.push(0.0);
    traj.efforts.push(desc.effort_map().matvec(&x));
    traj.states.push(x);
    for k in 1..=steps {
        let prev = traj.states.last().expect("nonempty");
        let next = match stepper.step(prev) {
            Ok(y) => y,
            Err(e) => return (traj, Some(e)),
        };
        if !finite(&next) {
            return (
                traj,
                Some(Error::Solver {
                    step: k,
                    reason: "non-finite state".into(),
                }),
            );
        }
        let t = k as f64 * dt;
        let row = ledger_row(desc, prev, &next, t, dt);
        traj.ledger.rows.push(row);
        traj.times.push(t);
        traj.efforts.push(desc.effort_map().matvec(&next));
        traj.states.push(next);
    }
    (traj, None)
}

/// Integrates with the implicit midpoint rule from a consistent start.
pub fn simulate(desc: &PhDescriptor, x0: &[f64], t_final: f64, dt: f64) -> Result<Trajectory> {
    match simulate_partial(desc, x0, t_final, dt) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_singular_diagonal() {
        let m = Mat::from_diag(&[1.0, 0.0, 2.0, 0.0]);
        let z = left_null_space(&m, 1e-12);
        assert_eq!(z.len(), 2);
        for v in &z {
            assert!(m.tmatvec(v).iter().all(|x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn null_space_with_coupling() {
        // rows: [1 0], [2 0] -> left null vector (2, -1)
        let m = Mat::from_row_major(2, 2, vec![1.0, 0.0, 2.0, 0.0]).unwrap();
        let z = left_null_space(&m, 1e-12);
        assert_eq!(z.len(), 1);
        assert!(m.tmatvec(&z[0]).iter().all(|x| x.abs() < 1e-14));
    }
}
