use std::collections::HashMap;

use super::SimplicialBandMesh;
use crate::element::{local_edges, ElementOrder};

/// Global numbering of the Lagrange nodes of a band mesh.
///
/// Vertex DOFs come first and coincide with mesh vertex indices; P2 edge
/// DOFs follow in order of first appearance in the element loop.
#[derive(Clone, Debug)]
pub struct DofMap<const D: usize> {
    order: ElementOrder,
    n_local: usize,
    n_vertices: usize,
    element_dofs: Vec<usize>,
    nodes: Vec<[f64; D]>,
}

impl<const D: usize> DofMap<D> {
    pub fn new(mesh: &SimplicialBandMesh<D>, order: ElementOrder) -> Self {
        let n_local = order.local_dofs(D);
        let n_vertices = mesh.n_vertices();
        let mut nodes = mesh.vertices().to_vec();
        let mut element_dofs = Vec::with_capacity(mesh.n_simplices() * n_local);
        match order {
            ElementOrder::Linear => {
                for s in mesh.simplices() {
                    element_dofs.extend_from_slice(s);
                }
            }
            ElementOrder::Quadratic => {
                let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
                for s in mesh.simplices() {
                    element_dofs.extend_from_slice(s);
                    for &(i, j) in local_edges(D) {
                        let key = (s[i].min(s[j]), s[i].max(s[j]));
                        let next = nodes.len();
                        let id = *edge_ids.entry(key).or_insert_with(|| {
                            let (a, b) = (mesh.vertex(key.0), mesh.vertex(key.1));
                            let mut m = [0.0; D];
                            for k in 0..D {
                                m[k] = 0.5 * (a[k] + b[k]);
                            }
                            nodes.push(m);
                            next
                        });
                        element_dofs.push(id);
                    }
                }
            }
        }
        Self {
            order,
            n_local,
            n_vertices,
            element_dofs,
            nodes,
        }
    }

    pub fn p1(mesh: &SimplicialBandMesh<D>) -> Self {
        Self::new(mesh, ElementOrder::Linear)
    }

    pub fn p2(mesh: &SimplicialBandMesh<D>) -> Self {
        Self::new(mesh, ElementOrder::Quadratic)
    }

    pub fn order(&self) -> ElementOrder {
        self.order
    }

    pub fn n_dofs(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn n_vertex_dofs(&self) -> usize {
        self.n_vertices
    }

    pub fn element_dofs(&self, t: usize) -> &[usize] {
        &self.element_dofs[t * self.n_local..(t + 1) * self.n_local]
    }

    /// Coordinates of every Lagrange node.
    pub fn nodes(&self) -> &[[f64; D]] {
        &self.nodes
    }

    /// Nodal interpolant `I_h g` as a coefficient vector.
    pub fn interpolate(&self, g: impl Fn(&[f64; D]) -> f64) -> Vec<f64> {
        self.nodes.iter().map(g).collect()
    }
}
