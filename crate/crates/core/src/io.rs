//! Snapshot and trajectory writers.
//!
//! Three formats:
//! - VTK legacy structured grid, ASCII, with the embedded node positions;
//! - a raw little-endian binary format tagged `SNEMA1`;
//! - the energy CSV with a fixed column order and 17 significant digits.
//!
//! Binary layout: the 6 magic bytes, then `N1`, `N2` and the field count as
//! `u64`. The name table follows with, per field, a `u32` name length, the
//! UTF-8 name and a `u32` component count (1, 3 or 9). The payload stores
//! every field in table order as `f64` values. Within a field the node index
//! varies fastest, and components are in row-major order. Node `k` is
//! `i1 * N2 + i2`.

use std::io::{self, BufRead, Read, Write};

use crate::diagnostics::EnergyReport;
use crate::geometry::ChartGeometry;
use crate::solvers::SimState;

pub const MAGIC: &[u8; 6] = b"SNEMA1";

/// Column names of the energy CSV, in file order.
pub const ENERGY_COLUMNS: [&str; 10] =
    ["t", "E_K", "E_EL", "E_TH", "E_BE", "E_tot", "R_IM", "R_NV", "audit_residual", "inext_residual"];

/// Node values of one exported field.
#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotData {
    Scalar(Vec<f64>),
    Vector(Vec<crate::Vec3>),
    Matrix(Vec<crate::Mat3>),
}

impl SnapshotData {
    pub fn components(&self) -> usize {
        match self {
            Self::Scalar(_) => 1,
            Self::Vector(_) => 3,
            Self::Matrix(_) => 9,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Scalar(d) => d.len(),
            Self::Vector(d) => d.len(),
            Self::Matrix(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Component `c` (row-major for matrices) at node `k`.
    pub fn component(&self, k: usize, c: usize) -> f64 {
        match self {
            Self::Scalar(d) => d[k],
            Self::Vector(d) => d[k][c],
            Self::Matrix(d) => d[k][(c / 3, c % 3)],
        }
    }
}

/// A named field ready for export.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedField {
    pub name: String,
    pub data: SnapshotData,
}

impl NamedField {
    pub fn new(name: impl Into<String>, data: SnapshotData) -> Self {
        Self { name: name.into(), data }
    }
}

/// Velocity, pressure, Q-tensor and normal eigenvalue of a solver state.
pub fn state_fields(state: &SimState) -> Vec<NamedField> {
    vec![
        NamedField::new("v", SnapshotData::Vector(state.v.data.clone())),
        NamedField::new("p", SnapshotData::Scalar(state.p.data.clone())),
        NamedField::new("q", SnapshotData::Matrix(state.q.data.clone())),
        NamedField::new("beta", SnapshotData::Scalar(state.beta.data.clone())),
    ]
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn check_lengths(n: usize, fields: &[NamedField]) -> io::Result<()> {
    for f in fields {
        if f.data.len() != n {
            return Err(invalid(format!("field '{}' has {} nodes, grid has {n}", f.name, f.data.len())));
        }
        if f.name.is_empty() || f.name.chars().any(char::is_whitespace) {
            return Err(invalid(format!("field name '{}' must be non-empty without whitespace", f.name)));
        }
    }
    Ok(())
}

/// Writes a VTK legacy structured grid. The second chart index runs fastest,
/// so the VTK dimensions are `N2 N1 1`.
pub fn write_vtk<W: Write>(mut w: W, chart: &ChartGeometry, title: &str, fields: &[NamedField]) -> io::Result<()> {
    let g = &chart.grid;
    let n = g.len();
    check_lengths(n, fields)?;
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.lines().next().unwrap_or("surfnema"))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_GRID")?;
    writeln!(w, "DIMENSIONS {} {} 1", g.n2, g.n1)?;
    writeln!(w, "POINTS {n} double")?;
    for x in &chart.x {
        writeln!(w, "{:e} {:e} {:e}", x[0], x[1], x[2])?;
    }
    if fields.is_empty() {
        return Ok(());
    }
    writeln!(w, "POINT_DATA {n}")?;
    for f in fields {
        match &f.data {
            SnapshotData::Scalar(d) => {
                writeln!(w, "SCALARS {} double 1", f.name)?;
                writeln!(w, "LOOKUP_TABLE default")?;
                for s in d {
                    writeln!(w, "{s:e}")?;
                }
            }
            SnapshotData::Vector(d) => {
                writeln!(w, "VECTORS {} double", f.name)?;
                for v in d {
                    writeln!(w, "{:e} {:e} {:e}", v[0], v[1], v[2])?;
                }
            }
            SnapshotData::Matrix(d) => {
                writeln!(w, "TENSORS {} double", f.name)?;
                for m in d {
                    for r in 0..3 {
                        writeln!(w, "{:e} {:e} {:e}", m[(r, 0)], m[(r, 1)], m[(r, 2)])?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Writes the `SNEMA1` binary snapshot.
pub fn write_binary<W: Write>(mut w: W, n1: usize, n2: usize, fields: &[NamedField]) -> io::Result<()> {
    check_lengths(n1 * n2, fields)?;
    w.write_all(MAGIC)?;
    for v in [n1 as u64, n2 as u64, fields.len() as u64] {
        w.write_all(&v.to_le_bytes())?;
    }
    for f in fields {
        w.write_all(&(f.name.len() as u32).to_le_bytes())?;
        w.write_all(f.name.as_bytes())?;
        w.write_all(&(f.data.components() as u32).to_le_bytes())?;
    }
    let n = n1 * n2;
    for f in fields {
        for c in 0..f.data.components() {
            for k in 0..n {
                w.write_all(&f.data.component(k, c).to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// A decoded `SNEMA1` file.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySnapshot {
    pub n1: usize,
    pub n2: usize,
    pub fields: Vec<NamedField>,
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Reads a file written by [`write_binary`].
pub fn read_binary<R: Read>(mut r: R) -> io::Result<BinarySnapshot> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("missing SNEMA1 magic"));
    }
    let n1 = read_u64(&mut r)? as usize;
    let n2 = read_u64(&mut r)? as usize;
    let count = read_u64(&mut r)? as usize;
    let mut table = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|_| invalid("field name is not UTF-8"))?;
        let comps = read_u32(&mut r)? as usize;
        if ![1, 3, 9].contains(&comps) {
            return Err(invalid(format!("field '{name}' has unsupported component count {comps}")));
        }
        table.push((name, comps));
    }
    let n = n1.checked_mul(n2).ok_or_else(|| invalid("grid size overflows"))?;
    let mut fields = Vec::with_capacity(table.len());
    for (name, comps) in table {
        let mut vals = vec![0.0; comps * n];
        let mut b = [0u8; 8];
        for v in vals.iter_mut() {
            r.read_exact(&mut b)?;
            *v = f64::from_le_bytes(b);
        }
        let at = |k: usize, c: usize| vals[c * n + k];
        let data = match comps {
            1 => SnapshotData::Scalar(vals.clone()),
            3 => SnapshotData::Vector((0..n).map(|k| crate::Vec3::from_fn(|c, _| at(k, c))).collect()),
            _ => SnapshotData::Matrix((0..n).map(|k| crate::Mat3::from_fn(|i, j| at(k, 3 * i + j))).collect()),
        };
        fields.push(NamedField { name, data });
    }
    Ok(BinarySnapshot { n1, n2, fields })
}

/// Formats a float with 17 significant digits.
fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the energy CSV: a header line and one row per sample.
pub fn write_energy_csv<W: Write>(mut w: W, samples: &[EnergyReport]) -> io::Result<()> {
    writeln!(w, "{}", ENERGY_COLUMNS.join(","))?;
    for s in samples {
        let row = [s.t, s.e_k, s.e_el, s.e_th, s.e_be, s.e_tot, s.r_im, s.r_nv, s.audit_residual, s.inext_residual];
        let cells: Vec<String> = row.iter().copied().map(sig17).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads a CSV produced by [`write_energy_csv`]. The header must match exactly.
pub fn read_energy_csv<R: BufRead>(r: R) -> io::Result<Vec<EnergyReport>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| invalid("empty energy CSV"))??;
    if header.trim() != ENERGY_COLUMNS.join(",") {
        return Err(invalid(format!("unexpected header '{}'", header.trim())));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| invalid(format!("line {}: {e}", i + 2)))?;
        if vals.len() != ENERGY_COLUMNS.len() {
            return Err(invalid(format!(
                "line {}: expected {} columns, got {}",
                i + 2,
                ENERGY_COLUMNS.len(),
                vals.len()
            )));
        }
        out.push(EnergyReport {
            t: vals[0],
            e_k: vals[1],
            e_el: vals[2],
            e_th: vals[3],
            e_be: vals[4],
            e_tot: vals[5],
            r_im: vals[6],
            r_nv: vals[7],
            audit_residual: vals[8],
            inext_residual: vals[9],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_chart, DerivativeScheme, SurfaceKind};
    use crate::{Mat3, Vec3};

    fn report(t: f64) -> EnergyReport {
        EnergyReport {
            t,
            e_k: 1.0 / 3.0,
            e_el: std::f64::consts::PI,
            e_th: -2.5e-17,
            e_be: 0.0,
            e_tot: 1e300,
            r_im: 7.0,
            r_nv: 0.1,
            audit_residual: f64::NAN,
            inext_residual: 1e-12,
        }
    }

    #[test]
    fn energy_csv_round_trip_is_exact() {
        let rows = vec![report(0.0), report(0.1)];
        let mut buf = Vec::new();
        write_energy_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,E_K,E_EL,E_TH,E_BE,E_tot,R_IM,R_NV,audit_residual,inext_residual\n"));
        assert!(text.contains("3.3333333333333331e-1"));
        let back = read_energy_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].e_el.to_bits(), rows[1].e_el.to_bits());
        assert_eq!(back[1].t.to_bits(), rows[1].t.to_bits());
        assert!(back[0].audit_residual.is_nan());
    }

    #[test]
    fn energy_csv_rejects_bad_header() {
        assert!(read_energy_csv(&b"time,E\n1,2\n"[..]).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let n = 8 * 10;
        let fields = vec![
            NamedField::new("s", SnapshotData::Scalar((0..n).map(|k| k as f64).collect())),
            NamedField::new("v", SnapshotData::Vector((0..n).map(|k| Vec3::new(k as f64, -1.0, 0.5)).collect())),
            NamedField::new(
                "m",
                SnapshotData::Matrix((0..n).map(|k| Mat3::from_fn(|i, j| (k * 9 + 3 * i + j) as f64)).collect()),
            ),
        ];
        let mut buf = Vec::new();
        write_binary(&mut buf, 8, 10, &fields).unwrap();
        assert_eq!(&buf[..6], MAGIC);
        let back = read_binary(&buf[..]).unwrap();
        assert_eq!((back.n1, back.n2), (8, 10));
        assert_eq!(back.fields, fields);
    }

    #[test]
    fn binary_rejects_wrong_magic() {
        assert!(read_binary(&b"SNEMA0\0\0\0\0\0\0\0\0"[..]).is_err());
    }

    #[test]
    fn vtk_header_and_sizes() {
        let c = build_chart(SurfaceKind::FlatTorus { p1: 1.0, p2: 2.0 }, 8, 10, DerivativeScheme::Spectral).unwrap();
        let st = SimState::zeros(c.len());
        let mut buf = Vec::new();
        write_vtk(&mut buf, &c, "test", &state_fields(&st)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("DIMENSIONS 10 8 1"));
        assert!(text.contains("POINTS 80 double"));
        assert!(text.contains("TENSORS q double"));
        // header 6 + points 80 + POINT_DATA 1 + v (1+80) + p (2+80) + q (1+240) + beta (2+80)
        assert_eq!(text.lines().count(), 6 + 80 + 1 + 81 + 82 + 241 + 82);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let f = vec![NamedField::new("s", SnapshotData::Scalar(vec![0.0; 3]))];
        assert!(write_binary(Vec::new(), 8, 8, &f).is_err());
    }
}
