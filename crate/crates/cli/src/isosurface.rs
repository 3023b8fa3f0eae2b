//! Marching tetrahedra on the piecewise linear interpolant `I_h φ`.
//!
//! Every output vertex lies on a mesh edge whose endpoint values of `I_h φ`
//! have opposite signs (`φ < 0` versus `φ >= 0`), at the zero of the linear
//! interpolant along that edge. Vertices are shared between neighbouring
//! tetrahedra through the edge key, so the output is a connected triangulation.

use std::collections::HashMap;

use phasefield::mesh::SimplicialBandMesh;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleSurface {
    pub points: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    /// One scalar per point.
    pub values: Vec<f64>,
}

impl TriangleSurface {
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                0.5 * norm(&cross(
                    &sub(&self.points[t[1]], &self.points[t[0]]),
                    &sub(&self.points[t[2]], &self.points[t[0]]),
                ))
            })
            .sum()
    }

    /// `(min, max)` of the point values; `None` for an empty surface.
    pub fn value_range(&self) -> Option<(f64, f64)> {
        let first = *self.values.first()?;
        Some(
            self.values
                .iter()
                .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))),
        )
    }
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Zero isosurface of the linear interpolant of `phi` over the given tetrahedra.
///
/// `values` are vertex scalars interpolated linearly onto the surface.
/// Triangles are oriented so their normals point towards increasing `φ`.
pub fn extract_isosurface<'a>(
    vertices: &[[f64; 3]],
    tetrahedra: impl IntoIterator<Item = &'a [usize]>,
    phi: &[f64],
    values: &[f64],
) -> TriangleSurface {
    let mut surface = TriangleSurface::default();
    let mut edge_points: HashMap<(usize, usize), usize> = HashMap::new();
    let mut crossing = |a: usize, b: usize, surface: &mut TriangleSurface| -> usize {
        let key = (a.min(b), a.max(b));
        *edge_points.entry(key).or_insert_with(|| {
            let (i, j) = key;
            let t = phi[i] / (phi[i] - phi[j]);
            let (p, q) = (vertices[i], vertices[j]);
            surface.points.push([
                p[0] + t * (q[0] - p[0]),
                p[1] + t * (q[1] - p[1]),
                p[2] + t * (q[2] - p[2]),
            ]);
            surface.values.push(values[i] + t * (values[j] - values[i]));
            surface.points.len() - 1
        })
    };
    for tet in tetrahedra {
        let (inside, outside): (Vec<usize>, Vec<usize>) = tet.iter().partition(|&&v| phi[v] < 0.0);
        let polygon: Vec<usize> = match (inside.len(), outside.len()) {
            (1, 3) => outside
                .iter()
                .map(|&o| crossing(inside[0], o, &mut surface))
                .collect(),
            (3, 1) => inside
                .iter()
                .map(|&i| crossing(i, outside[0], &mut surface))
                .collect(),
            // quadrilateral, listed in cyclic order
            (2, 2) => vec![
                crossing(inside[0], outside[0], &mut surface),
                crossing(inside[0], outside[1], &mut surface),
                crossing(inside[1], outside[1], &mut surface),
                crossing(inside[1], outside[0], &mut surface),
            ],
            _ => continue,
        };
        let grad = linear_gradient(tet.iter().map(|&v| (vertices[v], phi[v])));
        let mut emit = |a: usize, b: usize, c: usize| {
            let (pa, pb, pc) = (surface.points[a], surface.points[b], surface.points[c]);
            let n = cross(&sub(&pb, &pa), &sub(&pc, &pa));
            // repeated points collapse a triangle when φ vanishes at a vertex
            if a == b || b == c || a == c {
                return;
            }
            surface.triangles.push(if dot(&n, &grad) >= 0.0 {
                [a, b, c]
            } else {
                [a, c, b]
            });
        };
        emit(polygon[0], polygon[1], polygon[2]);
        if polygon.len() == 4 {
            emit(polygon[0], polygon[2], polygon[3]);
        }
    }
    surface
}

/// Gradient of the affine function through four `(point, value)` pairs.
fn linear_gradient(mut nodes: impl Iterator<Item = ([f64; 3], f64)>) -> [f64; 3] {
    let (p0, f0) = nodes.next().expect("tetrahedron has four vertices");
    let rest: Vec<([f64; 3], f64)> = nodes.collect();
    let e: Vec<[f64; 3]> = rest.iter().map(|(p, _)| sub(p, &p0)).collect();
    let df: Vec<f64> = rest.iter().map(|(_, f)| f - f0).collect();
    // ∇f = (df₁ (e₂×e₃) + df₂ (e₃×e₁) + df₃ (e₁×e₂)) / det
    let c = [
        cross(&e[1], &e[2]),
        cross(&e[2], &e[0]),
        cross(&e[0], &e[1]),
    ];
    let det = dot(&e[0], &c[0]);
    let mut g = [0.0; 3];
    for k in 0..3 {
        for d in 0..3 {
            g[d] += df[k] * c[k][d] / det;
        }
    }
    g
}

/// Zero isosurface of `I_h φ` on a band mesh, carrying vertex values of `u_h`.
///
/// For P2 coefficient vectors only the vertex DOFs (which come first) are used.
pub fn extract_zero_isosurface(mesh: &SimplicialBandMesh<3>, u_h: &[f64]) -> TriangleSurface {
    extract_isosurface(
        mesh.vertices(),
        mesh.simplices(),
        mesh.phi_at_vertices(),
        &u_h[..mesh.n_vertices()],
    )
}
