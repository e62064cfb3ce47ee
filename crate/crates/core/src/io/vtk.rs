//! Legacy ASCII VTK snapshots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::fem::DofLayout;
use crate::mesh::TriMesh;
use crate::timestepper::State;
use crate::{Error, Real, Result};

/// Writes vertex values of `S, I, R, C, p` and `U` (bubbles dropped).
pub fn write_vtk_snapshot<T: Real>(state: &State<T>, mesh: &TriMesh<T>, path: &Path) -> Result<()> {
    let nv = mesh.n_vertices();
    let layout = DofLayout::mini(mesh);
    if state.u.len() != layout.dof_count() || [&state.s, &state.i, &state.r, &state.c, &state.p].iter().any(|f| f.len() != nv)
    {
        return Err(Error::invalid("state does not match the mesh"));
    }
    let mut out = String::with_capacity(64 * nv);
    let _ = writeln!(out, "# vtk DataFile Version 2.0");
    let _ = writeln!(out, "sirpns t={:.8e} step={}", state.t.as_f64(), state.step);
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    mesh.write_vtk_geometry(&mut out);
    let _ = writeln!(out, "POINT_DATA {nv}");
    for (name, field) in [("S", &state.s), ("I", &state.i), ("R", &state.r), ("C", &state.c), ("p", &state.p)] {
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in field.iter() {
            let _ = writeln!(out, "{:.8e}", v.as_f64());
        }
    }
    let _ = writeln!(out, "VECTORS U double");
    for v in 0..nv {
        let ux = state.u[layout.vertex_dof(0, v)].as_f64();
        let uy = state.u[layout.vertex_dof(1, v)].as_f64();
        let _ = writeln!(out, "{ux:.8e} {uy:.8e} 0");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Contents of a file written by [`write_vtk_snapshot`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VtkSnapshot {
    pub points: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 3]>,
    pub scalars: BTreeMap<String, Vec<f64>>,
    pub vectors: BTreeMap<String, Vec<[f64; 2]>>,
}

/// Reads the subset of legacy VTK produced by this crate.
pub fn read_vtk_snapshot(path: &Path) -> Result<VtkSnapshot> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vtk(&text)
}

fn parse_vtk(text: &str) -> Result<VtkSnapshot> {
    let bad = |m: &str| Error::Parse(format!("vtk: {m}"));
    let mut lines = text.lines().skip(4);
    let mut words = || -> Option<Vec<&str>> { lines.next().map(|l| l.split_whitespace().collect()) };
    let num = |w: &str| w.parse::<f64>().map_err(|_| Error::Parse(format!("vtk: bad number `{w}`")));
    let idx = |w: &str| w.parse::<usize>().map_err(|_| Error::Parse(format!("vtk: bad index `{w}`")));
    let mut snap = VtkSnapshot::default();
    let mut n_points = 0;
    while let Some(head) = words() {
        match head.as_slice() {
            [] => {}
            ["POINTS", n, _] => {
                n_points = idx(n)?;
                for _ in 0..n_points {
                    let w = words().ok_or_else(|| bad("truncated POINTS"))?;
                    if w.len() < 2 {
                        return Err(bad("short point"));
                    }
                    snap.points.push([num(w[0])?, num(w[1])?]);
                }
            }
            ["CELLS", n, _] => {
                for _ in 0..idx(n)? {
                    let w = words().ok_or_else(|| bad("truncated CELLS"))?;
                    if w.len() != 4 || w[0] != "3" {
                        return Err(bad("only triangles are supported"));
                    }
                    snap.cells.push([idx(w[1])?, idx(w[2])?, idx(w[3])?]);
                }
            }
            ["CELL_TYPES", n] => {
                for _ in 0..idx(n)? {
                    words().ok_or_else(|| bad("truncated CELL_TYPES"))?;
                }
            }
            ["POINT_DATA", n] => {
                if idx(n)? != n_points {
                    return Err(bad("POINT_DATA size differs from POINTS"));
                }
            }
            ["SCALARS", name, ..] => {
                words().ok_or_else(|| bad("missing LOOKUP_TABLE"))?;
                let mut v = Vec::with_capacity(n_points);
                for _ in 0..n_points {
                    let w = words().ok_or_else(|| bad("truncated SCALARS"))?;
                    v.push(num(w.first().ok_or_else(|| bad("empty value"))?)?);
                }
                snap.scalars.insert(name.to_string(), v);
            }
            ["VECTORS", name, _] => {
                let mut v = Vec::with_capacity(n_points);
                for _ in 0..n_points {
                    let w = words().ok_or_else(|| bad("truncated VECTORS"))?;
                    if w.len() < 2 {
                        return Err(bad("short vector"));
                    }
                    v.push([num(w[0])?, num(w[1])?]);
                }
                snap.vectors.insert(name.to_string(), v);
            }
            other => return Err(bad(&format!("unexpected line `{}`", other.join(" ")))),
        }
    }
    Ok(snap)
}
