//! Lagrange P1/P2 shape functions on simplices, expressed in barycentric coordinates.
//!
//! Local node order: the `D + 1` vertices, then (P2 only) the edge midpoints in
//! the order of [`local_edges`].

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementOrder {
    Linear,
    Quadratic,
}

impl ElementOrder {
    pub fn from_degree(degree: usize) -> Option<Self> {
        match degree {
            1 => Some(Self::Linear),
            2 => Some(Self::Quadratic),
            _ => None,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Self::Linear => 1,
            Self::Quadratic => 2,
        }
    }

    /// Number of local nodes on a simplex in `R^dimension`.
    pub fn local_dofs(self, dimension: usize) -> usize {
        match self {
            Self::Linear => dimension + 1,
            Self::Quadratic => (dimension + 1) * (dimension + 2) / 2,
        }
    }
}

impl fmt::Display for ElementOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.degree())
    }
}

const EDGES_2D: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
const EDGES_3D: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn local_edges(dimension: usize) -> &'static [(usize, usize)] {
    match dimension {
        2 => &EDGES_2D,
        3 => &EDGES_3D,
        _ => panic!("simplices of dimension {dimension} are not supported"),
    }
}

/// Shape functions tabulated at a fixed set of barycentric points.
///
/// `values[p * n + k]` is `N_k` at point `p`; `dlambda[(p * n + k) * (D + 1) + w]`
/// is `∂N_k/∂λ_w`, so that `∇N_k = Σ_w ∂N_k/∂λ_w ∇λ_w` on any element.
#[derive(Clone, Debug)]
pub struct TabulatedBasis {
    order: ElementOrder,
    dimension: usize,
    n_local: usize,
    values: Vec<f64>,
    dlambda: Vec<f64>,
}

impl TabulatedBasis {
    pub fn new(order: ElementOrder, dimension: usize, points: &[Vec<f64>]) -> Self {
        let n_local = order.local_dofs(dimension);
        let nb = dimension + 1;
        let mut values = vec![0.0; points.len() * n_local];
        let mut dlambda = vec![0.0; points.len() * n_local * nb];
        for (p, bary) in points.iter().enumerate() {
            evaluate(
                order,
                dimension,
                bary,
                &mut values[p * n_local..(p + 1) * n_local],
                &mut dlambda[p * n_local * nb..(p + 1) * n_local * nb],
            );
        }
        Self {
            order,
            dimension,
            n_local,
            values,
            dlambda,
        }
    }

    pub fn order(&self) -> ElementOrder {
        self.order
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn values(&self, point: usize) -> &[f64] {
        &self.values[point * self.n_local..(point + 1) * self.n_local]
    }

    /// Physical gradients at a tabulated point, given the element's `∇λ_w`.
    pub fn gradients<const D: usize>(
        &self,
        point: usize,
        grad_lambda: &[[f64; D]],
        out: &mut [[f64; D]],
    ) {
        debug_assert_eq!(D, self.dimension);
        let nb = D + 1;
        let base = point * self.n_local * nb;
        for (k, g) in out.iter_mut().enumerate().take(self.n_local) {
            let coeffs = &self.dlambda[base + k * nb..base + (k + 1) * nb];
            *g = [0.0; D];
            for (c, gl) in coeffs.iter().zip(grad_lambda) {
                if *c != 0.0 {
                    for d in 0..D {
                        g[d] += c * gl[d];
                    }
                }
            }
        }
    }
}

/// Shape function values and barycentric derivatives at a single point.
pub fn evaluate(
    order: ElementOrder,
    dimension: usize,
    bary: &[f64],
    values: &mut [f64],
    dlambda: &mut [f64],
) {
    let nb = dimension + 1;
    dlambda.iter_mut().for_each(|v| *v = 0.0);
    match order {
        ElementOrder::Linear => {
            for v in 0..nb {
                values[v] = bary[v];
                dlambda[v * nb + v] = 1.0;
            }
        }
        ElementOrder::Quadratic => {
            for v in 0..nb {
                values[v] = bary[v] * (2.0 * bary[v] - 1.0);
                dlambda[v * nb + v] = 4.0 * bary[v] - 1.0;
            }
            for (e, &(i, j)) in local_edges(dimension).iter().enumerate() {
                let k = nb + e;
                values[k] = 4.0 * bary[i] * bary[j];
                dlambda[k * nb + i] = 4.0 * bary[j];
                dlambda[k * nb + j] = 4.0 * bary[i];
            }
        }
    }
}

/// Barycentric coordinates of the local nodes.
pub fn node_barycentrics(order: ElementOrder, dimension: usize) -> Vec<Vec<f64>> {
    let nb = dimension + 1;
    let mut nodes: Vec<Vec<f64>> = (0..nb)
        .map(|v| {
            let mut b = vec![0.0; nb];
            b[v] = 1.0;
            b
        })
        .collect();
    if order == ElementOrder::Quadratic {
        for &(i, j) in local_edges(dimension) {
            let mut b = vec![0.0; nb];
            b[i] = 0.5;
            b[j] = 0.5;
            nodes.push(b);
        }
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_basis_property() {
        for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
            for dim in [2, 3] {
                let nodes = node_barycentrics(order, dim);
                let n = order.local_dofs(dim);
                assert_eq!(nodes.len(), n);
                let basis = TabulatedBasis::new(order, dim, &nodes);
                for p in 0..n {
                    for (k, v) in basis.values(p).iter().enumerate() {
                        let expected = if k == p { 1.0 } else { 0.0 };
                        assert!((v - expected).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_and_zero_gradient_sum() {
        let pts = vec![vec![0.2, 0.3, 0.1, 0.4], vec![0.7, 0.1, 0.1, 0.1]];
        let basis = TabulatedBasis::new(ElementOrder::Quadratic, 3, &pts);
        let grad_lambda = [
            [-1.0, -1.0, -1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let mut g = [[0.0; 3]; 10];
        for p in 0..2 {
            assert!((basis.values(p).iter().sum::<f64>() - 1.0).abs() < 1e-15);
            basis.gradients(p, &grad_lambda, &mut g);
            for d in 0..3 {
                assert!(g.iter().map(|v| v[d]).sum::<f64>().abs() < 1e-14);
            }
        }
    }
}
