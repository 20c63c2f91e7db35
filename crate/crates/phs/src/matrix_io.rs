//! Labeled plain-text matrix dumps.
//!
//! ```text
//! matrix E
//! shape 3 3
//! rows h[0] h[1] h[2]
//! cols h[0] h[1] h[2]
//! 1.0 0.0 0.0
//! ...
//! end
//! ```
//!
//! Values are written with shortest round-trip formatting, so reading a
//! dump back gives bitwise-identical matrices. Labels may not contain
//! whitespace.

use std::io::{self, BufRead, Write};
use std::path::Path;

use phs_core::Mat;

use crate::table::fmt_f64;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMatrix {
    pub name: String,
    pub mat: Mat,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

pub fn write_matrix<W: Write>(out: &mut W, m: &LabeledMatrix) -> io::Result<()> {
    writeln!(out, "matrix {}", m.name)?;
    writeln!(out, "shape {} {}", m.mat.rows(), m.mat.cols())?;
    if !m.row_labels.is_empty() {
        writeln!(out, "rows {}", m.row_labels.join(" "))?;
    }
    if !m.col_labels.is_empty() {
        writeln!(out, "cols {}", m.col_labels.join(" "))?;
    }
    for i in 0..m.mat.rows() {
        let line: Vec<String> = m.mat.row(i).iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    writeln!(out, "end")
}

fn invalid(line: usize, msg: impl Into<String>) -> io::Error {
    io::Error::new(
        io::ErrorKind::InvalidData,
        format!("line {line}: {}", msg.into()),
    )
}

/// Reads every matrix in a dump.
pub fn read_matrices<R: BufRead>(input: R) -> io::Result<Vec<LabeledMatrix>> {
    let mut out = Vec::new();
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)));
    while let Some(next) = lines.next() {
        let (no, line) = next?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let name = line
            .strip_prefix("matrix ")
            .ok_or_else(|| invalid(no, "expected `matrix <name>`"))?
            .trim()
            .to_string();
        let (no, shape) = lines.next().ok_or_else(|| invalid(no, "missing shape"))??;
        let dims: Vec<usize> = shape
            .strip_prefix("shape ")
            .ok_or_else(|| invalid(no, "expected `shape <rows> <cols>`"))?
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| invalid(no, format!("bad dimension `{t}`")))
            })
            .collect::<io::Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(invalid(no, "shape needs two numbers"));
        };
        let mut row_labels = Vec::new();
        let mut col_labels = Vec::new();
        let mut data = Vec::with_capacity(rows * cols);
        loop {
            let (no, line) = lines.next().ok_or_else(|| invalid(no, "missing `end`"))??;
            let line = line.trim();
            if line == "end" {
                break;
            }
            if let Some(rest) = line.strip_prefix("rows ") {
                row_labels = rest.split_whitespace().map(String::from).collect();
            } else if let Some(rest) = line.strip_prefix("cols ") {
                col_labels = rest.split_whitespace().map(String::from).collect();
            } else {
                let before = data.len();
                for t in line.split_whitespace() {
                    data.push(
                        t.parse::<f64>()
                            .map_err(|_| invalid(no, format!("bad number `{t}`")))?,
                    );
                }
                if data.len() - before != cols {
                    return Err(invalid(no, format!("expected {cols} values")));
                }
            }
        }
        let mat = Mat::from_row_major(rows, cols, data)
            .map_err(|e| invalid(no, format!("{name}: {e}")))?;
        out.push(LabeledMatrix {
            name,
            mat,
            row_labels,
            col_labels,
        });
    }
    Ok(out)
}

pub fn save(path: &Path, m: &LabeledMatrix) -> io::Result<()> {
    let mut w = io::BufWriter::new(std::fs::File::create(path)?);
    write_matrix(&mut w, m)?;
    w.flush()
}

pub fn load(path: &Path) -> io::Result<LabeledMatrix> {
    let file = std::fs::File::open(path)?;
    read_matrices(io::BufReader::new(file))?
        .into_iter()
        .next()
        .ok_or_else(|| invalid(0, "empty dump"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let mat =
            Mat::from_row_major(2, 3, vec![0.1, -1.0 / 3.0, 1e-310, 7.0, f64::MAX, -0.0]).unwrap();
        let m = LabeledMatrix {
            name: "X".into(),
            mat,
            row_labels: vec!["a".into(), "b".into()],
            col_labels: vec![],
        };
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let back = read_matrices(&buf[..]).unwrap();
        assert_eq!(back.len(), 1);
        let bits = |m: &Mat| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back[0].mat), bits(&m.mat));
        assert_eq!(back[0].row_labels, m.row_labels);
    }

    #[test]
    fn truncated_dump_is_an_error() {
        assert!(read_matrices("matrix A\nshape 1 2\n1 2\n".as_bytes()).is_err());
        assert!(read_matrices("matrix A\nshape 1 2\n1\nend\n".as_bytes()).is_err());
    }
}
