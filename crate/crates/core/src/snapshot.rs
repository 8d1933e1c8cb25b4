//! Cell-wise CSV snapshots: `i,j,k,x,y,z,rho,u1,u2,u3,m1,m2,m3,p,E`, one row
//! per cell in index order, unused axes written as zero.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::eos::Eos;
use crate::error::{Error, Result};
use crate::field::{CellField, CellVectorField};
use crate::mesh::{StructuredMesh, MAX_DIM};
use crate::state::State;

pub const SNAPSHOT_HEADER: [&str; 15] =
    ["i", "j", "k", "x", "y", "z", "rho", "u1", "u2", "u3", "m1", "m2", "m3", "p", "E"];

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_snapshot<W: Write>(state: &State, eos: &Eos, out: W) -> Result<()> {
    let mesh = state.mesh();
    let dim = mesh.dim();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_HEADER)?;
    let mut rec: Vec<String> = Vec::with_capacity(SNAPSHOT_HEADER.len());
    for cell in 0..mesh.n_cells() {
        rec.clear();
        let idx = mesh.multi_index(cell);
        let x = mesh.cell_center(cell);
        rec.extend(idx.iter().map(|i| i.to_string()));
        rec.extend(x.iter().map(|&c| fmt_f64(c)));
        let rho = state.rho[cell];
        let mut u = [0.0; MAX_DIM];
        u[..dim].copy_from_slice(state.u.cell(cell));
        let speed2: f64 = u.iter().map(|v| v * v).sum();
        rec.push(fmt_f64(rho));
        rec.extend(u.iter().map(|&v| fmt_f64(v)));
        rec.extend(u.iter().map(|&v| fmt_f64(rho * v)));
        rec.push(fmt_f64(eos.pressure(rho)));
        rec.push(fmt_f64(0.5 * rho * speed2 + eos.pressure_potential(rho)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshot_file(state: &State, eos: &Eos, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_snapshot(state, eos, file)
}

struct Row {
    idx: [usize; MAX_DIM],
    x: [f64; MAX_DIM],
    rho: f64,
    u: [f64; MAX_DIM],
}

fn parse_rows<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(SNAPSHOT_HEADER.iter().copied()) {
        return Err(Error::Snapshot(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|e| Error::Snapshot(format!("row {}, column {}: {e}", line + 1, SNAPSHOT_HEADER[i])))
        };
        let n = |i: usize| -> Result<usize> {
            rec[i].parse::<usize>().map_err(|e| Error::Snapshot(format!("row {}, column {}: {e}", line + 1, SNAPSHOT_HEADER[i])))
        };
        rows.push(Row {
            idx: [n(0)?, n(1)?, n(2)?],
            x: [f(3)?, f(4)?, f(5)?],
            rho: f(6)?,
            u: [f(7)?, f(8)?, f(9)?],
        });
    }
    if rows.is_empty() {
        return Err(Error::Snapshot("snapshot has no cells".into()));
    }
    Ok(rows)
}

/// Rebuilds the mesh from the indices and cell centres. An axis with a single
/// cell is treated as absent, so this needs at least two cells per used axis.
fn infer_mesh(rows: &[Row]) -> Result<StructuredMesh> {
    let mut cells = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for d in 0..MAX_DIM {
        let count = rows.iter().map(|r| r.idx[d]).max().unwrap_or(0) + 1;
        if count < 2 {
            break;
        }
        let at = |i: usize| rows.iter().find(|r| r.idx[d] == i && (0..MAX_DIM).all(|e| e == d || r.idx[e] == 0));
        let (Some(first), Some(last)) = (at(0), at(count - 1)) else {
            return Err(Error::Snapshot(format!("missing cells along axis {d}")));
        };
        let h = (last.x[d] - first.x[d]) / (count - 1) as f64;
        lower.push(first.x[d] - 0.5 * h);
        upper.push(last.x[d] + 0.5 * h);
        cells.push(count);
    }
    if cells.is_empty() {
        return Err(Error::Snapshot("cannot infer a mesh from a single cell".into()));
    }
    StructuredMesh::new(&cells, &lower, &upper)
}

/// Reads a snapshot back into a state at `time`. With `mesh` given, the rows
/// are checked against it; otherwise the mesh is inferred from the file.
pub fn read_snapshot<R: Read>(input: R, mesh: Option<Arc<StructuredMesh>>, time: f64) -> Result<State> {
    let rows = parse_rows(input)?;
    let mesh = match mesh {
        Some(m) => m,
        None => Arc::new(infer_mesh(&rows)?),
    };
    if rows.len() != mesh.n_cells() {
        return Err(Error::Snapshot(format!("{} rows for a mesh of {} cells", rows.len(), mesh.n_cells())));
    }
    let dim = mesh.dim();
    let mut rho = vec![0.0; rows.len()];
    let mut u = vec![0.0; rows.len() * dim];
    for (line, row) in rows.iter().enumerate() {
        let cell = mesh.linear_index(&row.idx[..dim]);
        if cell != line || row.idx[dim..].iter().any(|&i| i != 0) {
            return Err(Error::Snapshot(format!("row {} has index {:?}, expected cell {line}", line + 1, row.idx)));
        }
        rho[cell] = row.rho;
        u[cell * dim..(cell + 1) * dim].copy_from_slice(&row.u[..dim]);
    }
    State::new(CellField::new(mesh.clone(), rho)?, CellVectorField::new(mesh, u)?, time)
}

pub fn read_snapshot_file(path: &Path, mesh: Option<Arc<StructuredMesh>>, time: f64) -> Result<State> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    read_snapshot(file, mesh, time)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let mesh = Arc::new(StructuredMesh::new(&[3, 2], &[-1.0, 0.0], &[2.0, 0.5]).unwrap());
        let rho = CellField::from_fn(mesh.clone(), |c| 1.0 + 0.1 * c as f64);
        let u = CellVectorField::new(mesh.clone(), (0..12).map(|i| (i as f64).sin() / 3.0).collect()).unwrap();
        let s = State::new(rho, u, 0.3).unwrap();
        let eos = Eos::new(2.0, 1.4).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&s, &eos, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("i,j,k,x,y,z,rho,u1,u2,u3,m1,m2,m3,p,E\n"));
        let back = read_snapshot(&buf[..], Some(mesh.clone()), 0.3).unwrap();
        assert_eq!(back, s);
        let inferred = read_snapshot(&buf[..], None, 0.3).unwrap();
        assert_eq!(inferred.mesh().cells_per_axis(), &[3, 2]);
        assert_eq!(inferred.rho.values(), s.rho.values());
        assert!((inferred.mesh().lower()[0] + 1.0).abs() < 1e-14);
        assert!((inferred.mesh().upper()[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn bad_header_rejected() {
        let text = "a,b\n1,2\n";
        assert!(read_snapshot(text.as_bytes(), None, 0.0).is_err());
    }
}
