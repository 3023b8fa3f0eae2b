//! Legacy ASCII VTK output of triangle surfaces.

use std::fmt::Write;

use crate::isosurface::TriangleSurface;

/// `UNSTRUCTURED_GRID` of triangles (cell type 5) with one point scalar `u_h`.
pub fn write_vtk(surface: &TriangleSurface, title: &str) -> String {
    let mut out = String::new();
    let n_points = surface.points.len();
    let n_cells = surface.triangles.len();
    out.push_str("# vtk DataFile Version 3.0\n");
    // the title line may not contain newlines
    out.push_str(&title.replace('\n', " "));
    out.push_str("\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {n_points} double").unwrap();
    for p in &surface.points {
        writeln!(out, "{:e} {:e} {:e}", p[0], p[1], p[2]).unwrap();
    }
    writeln!(out, "CELLS {n_cells} {}", 4 * n_cells).unwrap();
    for t in &surface.triangles {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(out, "CELL_TYPES {n_cells}").unwrap();
    for _ in 0..n_cells {
        out.push_str("5\n");
    }
    writeln!(out, "POINT_DATA {n_points}").unwrap();
    out.push_str("SCALARS u_h double 1\nLOOKUP_TABLE default\n");
    for v in &surface.values {
        writeln!(out, "{v:e}").unwrap();
    }
    out
}
