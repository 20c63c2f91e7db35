//! CSV output. Floats use Rust's shortest round-trip formatting, so two
//! runs of the same scenario produce identical bytes.

use std::io::Write;
use std::path::Path;

use phs_core::integrator::{EnergyLedger, Trajectory};
use phs_core::PhDescriptor;

pub const LEDGER_HEADER: [&str; 7] = [
    "t",
    "H",
    "dH_dt",
    "boundary_power",
    "boundary_energy_rate",
    "dissipation",
    "residual",
];

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// A named table of preformatted cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn save(&self, path: &Path) -> csv::Result<()> {
        let file = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(file))
    }
}

pub fn ledger_table(ledger: &EnergyLedger) -> Table {
    let mut t = Table::new("ledger", &LEDGER_HEADER);
    for r in &ledger.rows {
        t.push(
            [
                r.t,
                r.h,
                r.dh_dt,
                r.boundary_power,
                r.boundary_energy_rate,
                r.dissipation,
                r.residual,
            ]
            .iter()
            .map(|&v| fmt_f64(v))
            .collect(),
        );
    }
    t
}

/// `t, H` and one column per unknown, named `field[i]`.
pub fn trajectory_table(desc: &PhDescriptor, traj: &Trajectory) -> Table {
    let mut header = vec!["t".to_string(), "H".to_string()];
    for f in desc.fields() {
        header.extend((0..desc.nodes()).map(|i| format!("{}[{i}]", f.name)));
    }
    let mut t = Table {
        name: "trajectory".into(),
        header,
        rows: Vec::new(),
    };
    for (time, x) in traj.times.iter().zip(&traj.states) {
        let h = desc.eval_hamiltonian(x).unwrap_or(f64::NAN);
        let mut row = vec![fmt_f64(*time), fmt_f64(h)];
        row.extend(x.iter().map(|&v| fmt_f64(v)));
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
