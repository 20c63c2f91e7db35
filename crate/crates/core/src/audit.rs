//! Independent checks on assembled systems and computed trajectories.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::descriptor::{PhDescriptor, TermKind};
use crate::error::{Error, Result};
use crate::integrator::{consistent_init, ledger_row, step_midpoint, Trajectory};
use crate::linalg::Mat;
use crate::sbp::SbpSet;

/// Seed used by every randomized check unless the caller supplies one.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Nodes kept at zero at each end of a perturbation direction.
pub const SUPPORT_MARGIN: usize = 2;

/// Random direction vanishing on the outer [`SUPPORT_MARGIN`] nodes of
/// every field.
pub fn interior_direction(rng: &mut ChaCha8Rng, fields: usize, n: usize) -> Vec<f64> {
    (0..fields * n)
        .map(|i| {
            let node = i % n;
            if node < SUPPORT_MARGIN || node + SUPPORT_MARGIN >= n {
                0.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        })
        .collect()
}

/// Smooth random field: a few sine modes with random phases and amplitudes.
pub fn smooth_field(rng: &mut ChaCha8Rng, sbp: &SbpSet) -> Vec<f64> {
    let g = sbp.grid();
    let (a, len) = (g.x_left(), g.length());
    let modes: Vec<(f64, f64, f64)> = (1..=4)
        .map(|m| {
            (
                m as f64,
                rng.gen_range(-1.0..1.0) / m as f64,
                rng.gen_range(0.0..core::f64::consts::TAU),
            )
        })
        .collect();
    g.sample(|x| {
        modes
            .iter()
            .map(|&(m, amp, ph)| amp * libm::sin(m * core::f64::consts::PI * (x - a) / len + ph))
            .sum()
    })
}

/// Smooth random state on every storage field of `desc`.
pub fn smooth_state(desc: &PhDescriptor, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = Vec::with_capacity(desc.dim());
    for _ in desc.fields() {
        x.extend(smooth_field(rng, desc.sbp()));
    }
    x
}

/// Central difference of the discrete energy against the Lagrange form
/// `<S x, P d>_H`, worst case over `directions` interior-supported `d`,
/// relative to `|S x|_H |P d|_H`.
pub fn variational_derivative_check(
    desc: &PhDescriptor,
    x: &[f64],
    eps: f64,
    directions: usize,
    seed: u64,
) -> Result<f64> {
    if !(1e-8..=1e-3).contains(&eps) {
        return Err(Error::Config(format!(
            "perturbation scale must lie in [1e-8, 1e-3], got {eps}"
        )));
    }
    let parts = desc.parts();
    let grad = parts.lagrange_s.matvec(x);
    let w = desc.norm();
    let norm = |v: &[f64]| libm::sqrt(v.iter().zip(&w).map(|(a, b)| a * a * b).sum());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..directions {
        let d = interior_direction(&mut rng, desc.fields().len(), desc.nodes());
        let plus: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - eps * b).collect();
        let fd = (desc.eval_hamiltonian(&plus)? - desc.eval_hamiltonian(&minus)?) / (2.0 * eps);
        let pd = parts.lagrange_p.matvec(&d);
        let exact: f64 = grad
            .iter()
            .zip(&pd)
            .zip(&w)
            .map(|((a, b), c)| a * b * c)
            .sum();
        let scale = (norm(&grad) * norm(&pd)).max(f64::MIN_POSITIVE);
        worst = worst.max((fd - exact).abs() / scale);
    }
    Ok(worst)
}

/// `H_k(u) = 1/2 |D^k u|_H^2`, the model energy whose weak derivative is
/// `(-1)^k d^{2k} u`.
#[derive(Clone, Debug)]
pub struct SobolevEnergy {
    order: usize,
    dk: Mat,
    sbp: SbpSet,
}

impl SobolevEnergy {
    pub fn new(sbp: &SbpSet, order: usize) -> Self {
        Self {
            order,
            dk: sbp.d_power(order),
            sbp: sbp.clone(),
        }
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        let du = self.dk.matvec(u);
        0.5 * self.sbp.inner(&du, &du)
    }

    /// `(-1)^k D^k D^k u`.
    pub fn derivative(&self, u: &[f64]) -> Vec<f64> {
        let sign = if self.order.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        self.dk
            .matvec(&self.dk.matvec(u))
            .into_iter()
            .map(|v| sign * v)
            .collect()
    }

    /// Worst relative central-difference error over interior directions.
    pub fn central_difference_check(
        &self,
        u: &[f64],
        eps: f64,
        directions: usize,
        seed: u64,
    ) -> f64 {
        let grad = self.derivative(u);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..directions {
            let d = interior_direction(&mut rng, 1, self.sbp.len());
            let plus: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + eps * b).collect();
            let minus: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - eps * b).collect();
            let fd = (self.value(&plus) - self.value(&minus)) / (2.0 * eps);
            let exact = self.sbp.inner(&grad, &d);
            let scale = (self.sbp.h_norm(&grad) * self.sbp.h_norm(&d)).max(f64::MIN_POSITIVE);
            worst = worst.max((fd - exact).abs() / scale);
        }
        worst
    }

    /// Relative max error of the derivative of `sin(pi x)` on `[0, 1]`
    /// against `pi^{2k} sin(pi x)`, away from the closures.
    pub fn eigenfunction_error(&self) -> f64 {
        let g = self.sbp.grid();
        let len = g.length();
        let k = core::f64::consts::PI / len;
        let u = g.sample(|x| libm::sin(k * (x - g.x_left())));
        let lam = libm::pow(k, 2.0 * self.order as f64);
        let du = self.derivative(&u);
        let n = u.len();
        let skip = 2 * self.order;
        let mut err = 0.0f64;
        for i in skip..n.saturating_sub(skip) {
            err = err.max((du[i] - lam * u[i]).abs());
        }
        err / lam
    }
}

/// Per-step values of every balance monomial, recomputed from states.
#[derive(Clone, Debug, Default)]
pub struct BalanceReport {
    pub names: Vec<&'static str>,
    pub kinds: Vec<TermKind>,
    pub times: Vec<f64>,
    /// `values[step][term]`
    pub values: Vec<Vec<f64>>,
    /// `(H(x1) - H(x0)) / dt`
    pub dh_dt: Vec<f64>,
    /// `dH/dt - sum(boundary) + sum(dissipation)`, relative to the step scale.
    pub residual: Vec<f64>,
    /// Difference from the integrator ledger, relative to the step scale.
    pub ledger_gap: Vec<f64>,
    pub scale: Vec<f64>,
}

impl BalanceReport {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_ledger_gap(&self) -> f64 {
        self.ledger_gap.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `|value| / scale` among terms of `kind`.
    pub fn max_relative(&self, kind: TermKind) -> f64 {
        let mut worst = 0.0f64;
        for (row, s) in self.values.iter().zip(&self.scale) {
            for (v, k) in row.iter().zip(&self.kinds) {
                if *k == kind {
                    worst = worst.max(v.abs() / s.max(f64::MIN_POSITIVE));
                }
            }
        }
        worst
    }

    pub fn total(&self, step: usize, kind: TermKind) -> f64 {
        self.values[step]
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| **k == kind)
            .map(|(v, _)| *v)
            .sum()
    }
}

/// Restates each power-balance monomial at every step midpoint and checks
/// it against the plain energy difference and the integrator ledger.
pub fn rederive_balance(desc: &PhDescriptor, traj: &Trajectory) -> Result<BalanceReport> {
    if traj.states.len() < 2 {
        return Err(Error::Config("trajectory needs at least one step".into()));
    }
    let mut report = BalanceReport::default();
    for k in 1..traj.states.len() {
        let (x0, x1) = (&traj.states[k - 1], &traj.states[k]);
        let dt = traj.times[k] - traj.times[k - 1];
        let mid: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| 0.5 * (a + b)).collect();
        let rate: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| (b - a) / dt).collect();
        let terms = desc.ports().balance_terms(&mid, &rate);
        if report.names.is_empty() {
            report.names = terms.iter().map(|t| t.name).collect();
            report.kinds = terms.iter().map(|t| t.kind).collect();
        }
        let h0 = desc.eval_hamiltonian(x0)?;
        let h1 = desc.eval_hamiltonian(x1)?;
        let dh = (h1 - h0) / dt;
        let values: Vec<f64> = terms.iter().map(|t| t.value).collect();
        let boundary: f64 = terms
            .iter()
            .filter(|t| t.kind == TermKind::Boundary)
            .map(|t| t.value)
            .sum();
        let dissipation: f64 = terms
            .iter()
            .filter(|t| t.kind == TermKind::Dissipation)
            .map(|t| t.value)
            .sum();
        let row = traj
            .ledger
            .rows
            .get(k - 1)
            .copied()
            .unwrap_or_else(|| ledger_row(desc, x0, x1, traj.times[k], dt));
        let scale = values
            .iter()
            .fold(h1.abs().max(h0.abs()).max(dh.abs()), |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let gap = (boundary - row.boundary_power - row.boundary_energy_rate)
            .abs()
            .max((dissipation - row.dissipation).abs());
        report.times.push(traj.times[k]);
        report.values.push(values);
        report.dh_dt.push(dh);
        report
            .residual
            .push((dh - boundary + dissipation).abs() / scale);
        report.ledger_gap.push(gap / scale);
        report.scale.push(scale);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificationEntry {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificationReport {
    pub system: String,
    pub seed: u64,
    pub entries: Vec<CertificationEntry>,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CertificationEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn entry(&self, name: &str) -> Option<&CertificationEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Structural checks plus port duality (one midpoint step from a smooth
/// random state balances) and the variational derivative check.
pub fn certify(desc: &PhDescriptor, seed: u64) -> CertificationReport {
    let mut entries: Vec<CertificationEntry> = desc
        .structure_checks()
        .into_iter()
        .map(|c| CertificationEntry {
            name: c.name.into(),
            residual: c.residual,
            tolerance: c.tolerance,
            passed: c.passed,
            detail: c.detail,
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = smooth_state(desc, &mut rng);
    let dt = desc.default_dt();
    let duality = consistent_init(desc, &raw).and_then(|x0| {
        let x1 = step_midpoint(desc, &x0, dt)?;
        Ok((x0.clone(), ledger_row(desc, &x0, &x1, dt, dt)))
    });
    entries.push(match duality {
        Ok((_, row)) => entry(
            "port_duality",
            row.relative_residual(),
            1e-8,
            format!(
                "dH/dt {:.6e}, ports {:.6e}, dissipation {:.6e}",
                row.dh_dt,
                row.boundary_power + row.boundary_energy_rate,
                row.dissipation
            ),
        ),
        Err(e) => failed("port_duality", format!("{e}")),
    });
    let var = consistent_init(desc, &raw)
        .and_then(|x| variational_derivative_check(desc, &x, 1e-4, 20, seed));
    entries.push(match var {
        Ok(r) => entry(
            "variational_derivative",
            r,
            1e-8,
            String::from("20 interior directions"),
        ),
        Err(e) => failed("variational_derivative", format!("{e}")),
    });
    CertificationReport {
        system: desc.name().into(),
        seed,
        entries,
    }
}

fn entry(name: &str, residual: f64, tolerance: f64, detail: String) -> CertificationEntry {
    CertificationEntry {
        name: name.into(),
        residual,
        tolerance,
        passed: residual.is_finite() && residual <= tolerance,
        detail,
    }
}

fn failed(name: &str, detail: String) -> CertificationEntry {
    CertificationEntry {
        name: name.into(),
        residual: f64::INFINITY,
        tolerance: 0.0,
        passed: false,
        detail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbp::build_grid;

    #[test]
    fn quadratic_energy_is_differentiated_exactly() {
        let sbp = SbpSet::new(&build_grid(0.0, 1.0, 41).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = smooth_field(&mut rng, &sbp);
        for k in 1..=2 {
            let e = SobolevEnergy::new(&sbp, k);
            for eps in [1e-6, 1e-3] {
                assert!(e.central_difference_check(&u, eps, 10, 1) < 1e-9);
            }
        }
    }
}
