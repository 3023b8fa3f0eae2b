//! Narrow-band simplicial meshes cut out of a uniform background grid.
//!
//! Every grid cell is split into `D!` Kuhn (Freudenthal) simplices. A simplex
//! is kept when `|φ| <= ε arccos(h/ε)` holds at all of its quadrature points;
//! the union of the kept simplices is the computational domain.

mod dofs;

use rayon::prelude::*;

pub use dofs::DofMap;

use crate::geometry::{
    band_parameters, BandParameters, DomainBox, LevelSetGeometry, PhaseFieldProfile,
};
use crate::quadrature::QuadratureRule;
use crate::simplex::{self, norm};
use crate::{Error, Result};

/// Maximum number of simplex vertices (tetrahedra).
pub const MAX_VERTICES: usize = 4;

/// Barycentric tolerance for point location.
pub const LOCATE_TOLERANCE: f64 = 1e-12;

/// Uniform grid of cubes with spacing `h` covering a box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BackgroundGrid<const D: usize> {
    origin: [f64; D],
    h: f64,
    cells: [usize; D],
}

impl<const D: usize> BackgroundGrid<D> {
    /// Grid with `cells_per_axis` cells along every axis of a cubic box.
    pub fn with_cells(domain: &DomainBox<D>, cells_per_axis: usize) -> Result<Self> {
        if cells_per_axis == 0 {
            return Err(Error::InvalidInput(
                "grid needs at least one cell per axis".into(),
            ));
        }
        let h = domain.extent(0) / cells_per_axis as f64;
        for k in 1..D {
            if (domain.extent(k) - domain.extent(0)).abs() > 1e-12 * domain.extent(0) {
                return Err(Error::InvalidInput(
                    "cubic cells need a cubic domain".into(),
                ));
            }
        }
        Ok(Self {
            origin: domain.lower,
            h,
            cells: [cells_per_axis; D],
        })
    }

    /// Grid whose spacing is the closest divisor of the box extent to `h`.
    pub fn with_spacing(domain: &DomainBox<D>, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        let n = (domain.extent(0) / h).round().max(1.0) as usize;
        Self::with_cells(domain, n)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; D] {
        self.origin
    }

    pub fn cells_per_axis(&self) -> [usize; D] {
        self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().product()
    }

    /// Multi-index of a cell; axis 0 varies fastest.
    pub fn cell_index(&self, mut id: usize) -> [usize; D] {
        let mut idx = [0; D];
        for k in 0..D {
            idx[k] = id % self.cells[k];
            id /= self.cells[k];
        }
        idx
    }

    pub fn cell_id(&self, idx: &[usize; D]) -> usize {
        let mut id = 0;
        for k in (0..D).rev() {
            id = id * self.cells[k] + idx[k];
        }
        id
    }

    pub fn lattice_id(&self, idx: &[usize; D]) -> usize {
        let mut id = 0;
        for k in (0..D).rev() {
            id = id * (self.cells[k] + 1) + idx[k];
        }
        id
    }

    pub fn lattice_index(&self, mut id: usize) -> [usize; D] {
        let mut idx = [0; D];
        for k in 0..D {
            idx[k] = id % (self.cells[k] + 1);
            id /= self.cells[k] + 1;
        }
        idx
    }

    pub fn lattice_point(&self, idx: &[usize; D]) -> [f64; D] {
        let mut x = [0.0; D];
        for k in 0..D {
            x[k] = self.origin[k] + self.h * idx[k] as f64;
        }
        x
    }

    pub fn cell_center(&self, idx: &[usize; D]) -> [f64; D] {
        let mut x = self.lattice_point(idx);
        for c in &mut x {
            *c += 0.5 * self.h;
        }
        x
    }
}

/// Kuhn subdivision of the cell with lower corner `cell` into `D!` simplices,
/// given as lattice multi-indices.
///
/// Every simplex is a monotone lattice path from the lower to the upper corner,
/// one per permutation of the axes, so neighbouring cells triangulate their
/// shared faces identically.
pub fn kuhn_subdivide<const D: usize>(cell: &[usize; D]) -> Vec<Vec<[usize; D]>> {
    axis_permutations(D)
        .into_iter()
        .map(|perm| {
            let mut v = *cell;
            let mut simplex = Vec::with_capacity(D + 1);
            simplex.push(v);
            for axis in perm {
                v[axis] += 1;
                simplex.push(v);
            }
            simplex
        })
        .collect()
}

fn axis_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for rest in axis_permutations(n - 1) {
            let mut p = vec![first];
            p.extend(rest.into_iter().map(|a| if a >= first { a + 1 } else { a }));
            out.push(p);
        }
    }
    out
}

/// Affine data of one simplex.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry<const D: usize> {
    pub coords: [[f64; D]; MAX_VERTICES],
    pub volume: f64,
    pub grad_lambda: [[f64; D]; MAX_VERTICES],
}

impl<const D: usize> ElementGeometry<D> {
    pub fn vertices(&self) -> &[[f64; D]] {
        &self.coords[..D + 1]
    }

    pub fn grad_lambda(&self) -> &[[f64; D]] {
        &self.grad_lambda[..D + 1]
    }

    pub fn point(&self, bary: &[f64]) -> [f64; D] {
        simplex::from_barycentric(self.vertices(), bary)
    }
}

/// The computational domain: all band simplices of the background grid.
#[derive(Clone, Debug)]
pub struct SimplicialBandMesh<const D: usize> {
    grid: BackgroundGrid<D>,
    band: BandParameters,
    vertices: Vec<[f64; D]>,
    vertex_lattice: Vec<usize>,
    /// Flat connectivity with stride `D + 1`.
    simplices: Vec<usize>,
    phi_at_vertices: Vec<f64>,
    grad_interp_phi: Vec<f64>,
    /// Sorted ids of the grid cells that own at least one simplex.
    cells: Vec<usize>,
    /// `cell_offsets[i]..cell_offsets[i + 1]` are the simplices of `cells[i]`.
    cell_offsets: Vec<usize>,
}

/// Number of grid cells examined per parallel task.
const CELL_CHUNK: usize = 4096;

/// Select the band simplices of `grid` for the given geometry, profile and rule.
pub fn build_band_mesh<const D: usize>(
    grid: &BackgroundGrid<D>,
    geometry: &LevelSetGeometry<D>,
    profile: &PhaseFieldProfile,
    rule: &QuadratureRule,
) -> Result<SimplicialBandMesh<D>> {
    if rule.dimension() != D {
        return Err(Error::DimensionMismatch {
            expected: D,
            found: rule.dimension(),
        });
    }
    let h = grid.h();
    let epsilon = profile.epsilon();
    let band = band_parameters(h, epsilon, geometry.c1())?;
    let threshold = band.half_width;
    let prefilter = profile.support_half_width() + geometry.c1() * h * (D as f64).sqrt();
    let templates = kuhn_subdivide(&[0usize; D]);

    let n_cells = grid.cell_count();
    let n_chunks = n_cells.div_ceil(CELL_CHUNK);
    let accepted: Vec<Vec<(usize, [usize; MAX_VERTICES])>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut out = Vec::new();
            let mut coords = [[0.0; D]; MAX_VERTICES];
            for id in chunk * CELL_CHUNK..((chunk + 1) * CELL_CHUNK).min(n_cells) {
                let cell = grid.cell_index(id);
                if geometry.phi(&grid.cell_center(&cell)).abs() > prefilter {
                    continue;
                }
                for template in &templates {
                    let mut lattice = [0usize; MAX_VERTICES];
                    for (v, offset) in template.iter().enumerate() {
                        let mut idx = cell;
                        for k in 0..D {
                            idx[k] += offset[k];
                        }
                        lattice[v] = grid.lattice_id(&idx);
                        coords[v] = grid.lattice_point(&idx);
                    }
                    let inside = rule.points().iter().all(|b| {
                        let x = simplex::from_barycentric(&coords[..D + 1], b);
                        geometry.phi(&x).abs() <= threshold
                    });
                    if inside {
                        out.push((id, lattice));
                    }
                }
            }
            out
        })
        .collect();
    let accepted: Vec<(usize, [usize; MAX_VERTICES])> = accepted.into_iter().flatten().collect();
    if accepted.is_empty() {
        return Err(Error::EmptyBand { h, epsilon });
    }

    let mut vertex_lattice: Vec<usize> = accepted
        .iter()
        .flat_map(|(_, l)| l[..D + 1].iter().copied())
        .collect();
    vertex_lattice.par_sort_unstable();
    vertex_lattice.dedup();

    let simplices: Vec<usize> = accepted
        .par_iter()
        .flat_map_iter(|(_, l)| {
            l[..D + 1]
                .iter()
                .map(|id| vertex_lattice.binary_search(id).expect("vertex registered"))
                .collect::<Vec<_>>()
        })
        .collect();

    let vertices: Vec<[f64; D]> = vertex_lattice
        .iter()
        .map(|&id| grid.lattice_point(&grid.lattice_index(id)))
        .collect();
    let phi_at_vertices: Vec<f64> = vertices.par_iter().map(|x| geometry.phi(x)).collect();

    let mut cells = Vec::new();
    let mut cell_offsets = Vec::new();
    for (t, (cell, _)) in accepted.iter().enumerate() {
        if cells.last() != Some(cell) {
            cells.push(*cell);
            cell_offsets.push(t);
        }
    }
    cell_offsets.push(accepted.len());

    let mut mesh = SimplicialBandMesh {
        grid: *grid,
        band,
        vertices,
        vertex_lattice,
        simplices,
        phi_at_vertices,
        grad_interp_phi: Vec::new(),
        cells,
        cell_offsets,
    };
    mesh.grad_interp_phi = (0..mesh.n_simplices())
        .into_par_iter()
        .map(|t| {
            let geo = mesh.element_geometry(t);
            let mut g = [0.0; D];
            for (v, gl) in mesh.simplex(t).iter().zip(geo.grad_lambda()) {
                for k in 0..D {
                    g[k] += mesh.phi_at_vertices[*v] * gl[k];
                }
            }
            norm(&g)
        })
        .collect();
    Ok(mesh)
}

impl<const D: usize> SimplicialBandMesh<D> {
    pub fn grid(&self) -> &BackgroundGrid<D> {
        &self.grid
    }

    pub fn band(&self) -> &BandParameters {
        &self.band
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_simplices(&self) -> usize {
        self.simplices.len() / (D + 1)
    }

    pub fn vertices(&self) -> &[[f64; D]] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &[f64; D] {
        &self.vertices[v]
    }

    /// Lattice id of each vertex in the background grid.
    pub fn vertex_lattice_ids(&self) -> &[usize] {
        &self.vertex_lattice
    }

    pub fn simplex(&self, t: usize) -> &[usize] {
        &self.simplices[t * (D + 1)..(t + 1) * (D + 1)]
    }

    pub fn simplices(&self) -> impl Iterator<Item = &[usize]> {
        self.simplices.chunks_exact(D + 1)
    }

    /// Exact `φ` at the vertices, i.e. the nodal values of `I_h φ`.
    pub fn phi_at_vertices(&self) -> &[f64] {
        &self.phi_at_vertices
    }

    /// Element-constant `|∇ I_h φ|`.
    pub fn grad_interp_phi(&self, t: usize) -> f64 {
        self.grad_interp_phi[t]
    }

    pub fn element_geometry(&self, t: usize) -> ElementGeometry<D> {
        let mut coords = [[0.0; D]; MAX_VERTICES];
        for (c, &v) in coords.iter_mut().zip(self.simplex(t)) {
            *c = self.vertices[v];
        }
        let volume = simplex::volume(&coords[..D + 1]);
        let mut grad_lambda = [[0.0; D]; MAX_VERTICES];
        let grads = simplex::barycentric_gradients(&coords[..D + 1])
            .expect("band simplices are non-degenerate");
        grad_lambda[..D + 1].copy_from_slice(&grads);
        ElementGeometry {
            coords,
            volume,
            grad_lambda,
        }
    }

    /// Simplices owned by a background cell, if that cell is in the band.
    pub fn simplices_in_cell(&self, cell_id: usize) -> std::ops::Range<usize> {
        match self.cells.binary_search(&cell_id) {
            Ok(i) => self.cell_offsets[i]..self.cell_offsets[i + 1],
            Err(_) => 0..0,
        }
    }

    /// Find a simplex containing `x` and the barycentric coordinates of `x` in it.
    ///
    /// The owning grid cell is searched first, then its neighbours, so points
    /// on shared faces resolve deterministically.
    pub fn locate_point(&self, x: &[f64; D]) -> Result<(usize, Vec<f64>)> {
        let mut base = [0isize; D];
        for k in 0..D {
            let s = ((x[k] - self.grid.origin[k]) / self.grid.h).floor() as isize;
            base[k] = s.clamp(0, self.grid.cells[k] as isize - 1);
        }
        let n_offsets = 3usize.pow(D as u32);
        for o in 0..n_offsets {
            let mut idx = [0usize; D];
            let mut rem = o;
            let mut valid = true;
            for k in (0..D).rev() {
                let off = [0isize, -1, 1][rem % 3];
                rem /= 3;
                let c = base[k] + off;
                if c < 0 || c >= self.grid.cells[k] as isize {
                    valid = false;
                    break;
                }
                idx[k] = c as usize;
            }
            if !valid {
                continue;
            }
            for t in self.simplices_in_cell(self.grid.cell_id(&idx)) {
                let geo = self.element_geometry(t);
                if let Some(b) = simplex::to_barycentric(geo.vertices(), x) {
                    if b.iter().all(|&l| l >= -LOCATE_TOLERANCE) {
                        return Ok((t, b));
                    }
                }
            }
        }
        Err(Error::PointNotFound { point: x.to_vec() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::rule_for;
    use std::collections::HashMap;

    #[test]
    fn kuhn_square_and_cube() {
        let tris = kuhn_subdivide(&[0usize, 0]);
        assert_eq!(tris.len(), 2);
        for t in &tris {
            let c: Vec<[f64; 2]> = t.iter().map(|v| [v[0] as f64, v[1] as f64]).collect();
            assert!((simplex::volume(&c) - 0.5).abs() < 1e-15);
        }
        let tets = kuhn_subdivide(&[0usize, 0, 0]);
        assert_eq!(tets.len(), 6);
        let mut total = 0.0;
        for t in &tets {
            let c: Vec<[f64; 3]> = t.iter().map(|v| v.map(|i| i as f64)).collect();
            let vol = simplex::volume(&c);
            assert!((vol - 1.0 / 6.0).abs() < 1e-15);
            total += vol;
        }
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kuhn_cube_covers_without_overlap() {
        // Every interior point lies in exactly one tetrahedron.
        let tets = kuhn_subdivide(&[0usize, 0, 0]);
        let samples = [
            [0.1, 0.2, 0.3],
            [0.9, 0.15, 0.6],
            [0.33, 0.71, 0.52],
            [0.5, 0.45, 0.05],
        ];
        for x in samples {
            let hits = tets
                .iter()
                .filter(|t| {
                    let c: Vec<[f64; 3]> = t.iter().map(|v| v.map(|i| i as f64)).collect();
                    simplex::to_barycentric(&c, &x)
                        .unwrap()
                        .iter()
                        .all(|&l| l > 0.0)
                })
                .count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn adjacent_cells_share_face_triangulation() {
        // Faces on the plane x = 1 seen from cells (0,0,0) and (1,0,0).
        let faces = |cell: [usize; 3]| {
            let mut fs: Vec<Vec<[usize; 3]>> = kuhn_subdivide(&cell)
                .into_iter()
                .map(|t| {
                    let mut f: Vec<[usize; 3]> = t.into_iter().filter(|v| v[0] == 1).collect();
                    f.sort();
                    f
                })
                .filter(|f| f.len() == 3)
                .collect();
            fs.sort();
            fs
        };
        let left = faces([0, 0, 0]);
        assert_eq!(left.len(), 2);
        assert_eq!(left, faces([1, 0, 0]));
    }

    fn circle_mesh(
        q: usize,
    ) -> (
        SimplicialBandMesh<2>,
        LevelSetGeometry<2>,
        PhaseFieldProfile,
        QuadratureRule,
    ) {
        let geometry = LevelSetGeometry::circle();
        let grid = BackgroundGrid::with_cells(geometry.domain(), 64).unwrap();
        let profile = PhaseFieldProfile::new(q, grid.h(), 0.2 / grid.h()).unwrap();
        let rule = rule_for(2, q).unwrap();
        let mesh = build_band_mesh(&grid, &geometry, &profile, &rule).unwrap();
        (mesh, geometry, profile, rule)
    }

    #[test]
    fn band_matches_brute_force_scan() {
        let (mesh, geometry, profile, rule) = circle_mesh(6);
        let grid = mesh.grid();
        let threshold = profile.epsilon() * (grid.h() / profile.epsilon()).acos();
        assert!((threshold - 0.276_435_988_123_898_5).abs() < 1e-12);
        let mut brute = Vec::new();
        for id in 0..grid.cell_count() {
            for t in kuhn_subdivide(&grid.cell_index(id)) {
                let c: Vec<[f64; 2]> = t.iter().map(|i| grid.lattice_point(i)).collect();
                if rule
                    .points()
                    .iter()
                    .all(|b| geometry.phi(&simplex::from_barycentric(&c, b)).abs() <= threshold)
                {
                    brute.push(t.iter().map(|i| grid.lattice_id(i)).collect::<Vec<_>>());
                }
            }
        }
        let built: Vec<Vec<usize>> = mesh
            .simplices()
            .map(|s| s.iter().map(|&v| mesh.vertex_lattice_ids()[v]).collect())
            .collect();
        assert_eq!(built, brute);
    }

    #[test]
    fn mesh_is_conforming() {
        let (mesh, ..) = circle_mesh(2);
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for s in mesh.simplices() {
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let key = (s[i].min(s[j]), s[i].max(s[j]));
                *edges.entry(key).or_default() += 1;
            }
        }
        assert!(edges.values().all(|&c| c == 1 || c == 2));
        // boundary edges: two closed polygons around the annulus
        assert!(
            edges.values().filter(|&&c| c == 2).count()
                > edges.values().filter(|&&c| c == 1).count()
        );
    }

    #[test]
    fn element_invariants() {
        let (mesh, ..) = circle_mesh(1);
        let h = mesh.h();
        for t in 0..mesh.n_simplices() {
            let geo = mesh.element_geometry(t);
            assert!((geo.volume - 0.5 * h * h).abs() < 1e-15);
            assert!(simplex::diameter(geo.vertices()) <= h * 2f64.sqrt() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn locate_vertices_and_centroids() {
        let (mesh, ..) = circle_mesh(2);
        for t in (0..mesh.n_simplices()).step_by(97) {
            let geo = mesh.element_geometry(t);
            let c = geo.point(&[1.0 / 3.0; 3]);
            let (found, b) = mesh.locate_point(&c).unwrap();
            assert_eq!(found, t);
            assert!(b.iter().all(|l| (l - 1.0 / 3.0).abs() < 1e-12));
            let v = mesh.simplex(t)[0];
            let (found, b) = mesh.locate_point(mesh.vertex(v)).unwrap();
            assert!(mesh.simplex(found).contains(&v));
            assert!(b.iter().any(|l| (l - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn locate_outside_band_fails() {
        let (mesh, ..) = circle_mesh(2);
        assert!(matches!(
            mesh.locate_point(&[0.0, 0.0]),
            Err(Error::PointNotFound { .. })
        ));
    }

    #[test]
    fn empty_band_is_an_error() {
        use crate::geometry::{DomainBox, ImplicitFunction};
        // Γ = {|x| = 10} lies far outside Ω.
        let ls = ImplicitFunction::<2>::new(
            |x| x[0] * x[0] + x[1] * x[1] - 100.0,
            |x| [2.0 * x[0], 2.0 * x[1]],
        );
        let geometry = LevelSetGeometry::custom("far", ls, DomainBox::centered_cube(1.2), 200.0);
        let grid = BackgroundGrid::with_cells(geometry.domain(), 8).unwrap();
        let profile = PhaseFieldProfile::new(1, grid.h(), 5.0).unwrap();
        let rule = rule_for(2, 1).unwrap();
        assert!(matches!(
            build_band_mesh(&grid, &geometry, &profile, &rule),
            Err(Error::EmptyBand { .. })
        ));
        let bad = PhaseFieldProfile::new(1, grid.h(), 0.5).unwrap();
        assert!(matches!(
            build_band_mesh(&grid, &geometry, &bad, &rule),
            Err(Error::BandTooNarrow { .. })
        ));
    }
}
