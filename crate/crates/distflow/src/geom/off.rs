//! ASCII OFF import and export for mesh surfaces.
//!
//! The classic header `OFF` is followed by vertex, cell and edge counts
//! (edges written as zero), one vertex per line with `D` coordinates, and
//! one cell per line as `D i0 i1 [i2]`. Coordinates are written in Rust's
//! shortest round-trip form, so export, import, export reproduces the file
//! byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use super::{GeomError, MeshData};
use crate::{Scalar, Vector};

pub fn write_off<const D: usize>(mesh: &MeshData<D>) -> String {
    let mut out = String::new();
    out.push_str("OFF\n");
    let _ = writeln!(out, "{} {} 0", mesh.vertices.len(), mesh.cells.len());
    for v in &mesh.vertices {
        for d in 0..D {
            if d > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", v[d]);
        }
        out.push('\n');
    }
    for cell in &mesh.cells {
        let _ = write!(out, "{}", D);
        for &i in cell.iter() {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

pub fn read_off<const D: usize>(text: &str) -> Result<MeshData<D>, GeomError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, header) = lines.next().ok_or(GeomError::OffParse {
        line: 0,
        msg: "empty file".into(),
    })?;
    if header != "OFF" {
        return Err(GeomError::OffParse { line, msg: format!("expected OFF header, got {header:?}") });
    }
    let (line, counts) = lines.next().ok_or(GeomError::OffParse {
        line,
        msg: "missing count line".into(),
    })?;
    let counts: Vec<&str> = counts.split_whitespace().collect();
    if counts.len() != 3 {
        return Err(GeomError::OffParse { line, msg: "count line needs three fields".into() });
    }
    let nv: usize = counts[0]
        .parse()
        .map_err(|e| GeomError::OffParse { line, msg: format!("vertex count: {e}") })?;
    let nc: usize = counts[1]
        .parse()
        .map_err(|e| GeomError::OffParse { line, msg: format!("cell count: {e}") })?;
    let mut vertices: Vec<Vector<D>> = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, body) = lines.next().ok_or(GeomError::OffParse {
            line: usize::MAX,
            msg: "file ends inside vertex block".into(),
        })?;
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != D {
            return Err(GeomError::OffParse {
                line,
                msg: format!("expected {D} coordinates, got {}", fields.len()),
            });
        }
        let mut v = Vector::<D>::zeros();
        for (d, f) in fields.iter().enumerate() {
            v[d] = f
                .parse::<Scalar>()
                .map_err(|e| GeomError::OffParse { line, msg: format!("coordinate: {e}") })?;
        }
        vertices.push(v);
    }
    let mut cells: Vec<[usize; D]> = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (line, body) = lines.next().ok_or(GeomError::OffParse {
            line: usize::MAX,
            msg: "file ends inside cell block".into(),
        })?;
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != D + 1 || fields[0] != format!("{D}") {
            return Err(GeomError::OffParse {
                line,
                msg: format!("expected cell of {D} vertices"),
            });
        }
        let mut cell = [0usize; D];
        for (k, f) in fields[1..].iter().enumerate() {
            cell[k] = f
                .parse()
                .map_err(|e| GeomError::OffParse { line, msg: format!("vertex index: {e}") })?;
        }
        cells.push(cell);
    }
    if let Some((line, _)) = lines.next() {
        return Err(GeomError::OffParse { line, msg: "trailing content after cell block".into() });
    }
    MeshData::new(vertices, cells)
}

pub fn save_off<const D: usize>(mesh: &MeshData<D>, path: &Path) -> Result<(), GeomError> {
    std::fs::write(path, write_off(mesh))?;
    Ok(())
}

pub fn load_off<const D: usize>(path: &Path) -> Result<MeshData<D>, GeomError> {
    read_off(&std::fs::read_to_string(path)?)
}
