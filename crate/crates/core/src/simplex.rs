//! Affine simplex geometry: volumes, barycentric maps and gradients.

/// Relative volume threshold below which a simplex is treated as degenerate.
pub const DEGENERATE_VOLUME: f64 = 1e-13;

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Edge matrix `J` with columns `v_k - v_0`, stored row-major.
fn edge_matrix<const D: usize>(vertices: &[[f64; D]]) -> [[f64; D]; D] {
    let mut j = [[0.0; D]; D];
    for (k, v) in vertices[1..=D].iter().enumerate() {
        for r in 0..D {
            j[r][k] = v[r] - vertices[0][r];
        }
    }
    j
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<const D: usize>(m: &[[f64; D]; D]) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for c in 0..D {
        let p = (c..D)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..D {
            let f = a[r][c] / a[c][c];
            for k in c..D {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Solve `m x = b`. Returns `None` for a singular matrix.
pub fn solve<const D: usize>(m: &[[f64; D]; D], b: &[f64; D]) -> Option<[f64; D]> {
    let mut a = *m;
    let mut x = *b;
    for c in 0..D {
        let p = (c..D).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c] == 0.0 {
            return None;
        }
        a.swap(p, c);
        x.swap(p, c);
        for r in c + 1..D {
            let f = a[r][c] / a[c][c];
            for k in c..D {
                a[r][k] -= f * a[c][k];
            }
            x[r] -= f * x[c];
        }
    }
    for c in (0..D).rev() {
        let mut s = x[c];
        for k in c + 1..D {
            s -= a[c][k] * x[k];
        }
        x[c] = s / a[c][c];
    }
    Some(x)
}

/// Unsigned volume `|T|`.
pub fn volume<const D: usize>(vertices: &[[f64; D]]) -> f64 {
    determinant(&edge_matrix(vertices)).abs() / factorial(D)
}

/// Longest edge length, used to scale degeneracy checks.
pub fn scale<const D: usize>(vertices: &[[f64; D]]) -> f64 {
    diameter(vertices).max(f64::MIN_POSITIVE)
}

pub fn diameter<const D: usize>(vertices: &[[f64; D]]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            d = d.max(distance(a, b));
        }
    }
    d
}

pub fn distance<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn from_barycentric<const D: usize>(vertices: &[[f64; D]], bary: &[f64]) -> [f64; D] {
    let mut x = [0.0; D];
    for (v, &l) in vertices.iter().zip(bary) {
        for k in 0..D {
            x[k] += l * v[k];
        }
    }
    x
}

/// Barycentric coordinates of `x`; `None` if the simplex is degenerate.
pub fn to_barycentric<const D: usize>(vertices: &[[f64; D]], x: &[f64; D]) -> Option<Vec<f64>> {
    let j = edge_matrix(vertices);
    let mut rhs = [0.0; D];
    for k in 0..D {
        rhs[k] = x[k] - vertices[0][k];
    }
    let l = solve(&j, &rhs)?;
    let mut bary = Vec::with_capacity(D + 1);
    bary.push(1.0 - l.iter().sum::<f64>());
    bary.extend_from_slice(&l);
    Some(bary)
}

/// Constant gradients of the `D + 1` barycentric coordinate functions.
pub fn barycentric_gradients<const D: usize>(vertices: &[[f64; D]]) -> Option<Vec<[f64; D]>> {
    // grad(lambda_k) for k >= 1 are the rows of J^{-1}.
    let j = edge_matrix(vertices);
    let mut rows = vec![[0.0; D]; D];
    for c in 0..D {
        let mut e = [0.0; D];
        e[c] = 1.0;
        let col = solve(&j, &e)?;
        for r in 0..D {
            rows[r][c] = col[r];
        }
    }
    let mut grads = Vec::with_capacity(D + 1);
    let mut g0 = [0.0; D];
    for row in &rows {
        for k in 0..D {
            g0[k] -= row[k];
        }
    }
    grads.push(g0);
    grads.extend(rows);
    Some(grads)
}

pub fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_simplex_volumes() {
        assert!((volume(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]) - 0.5).abs() < 1e-16);
        let tet = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        assert!((volume(&tet) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn barycentric_roundtrip() {
        let tri = [[0.3, -0.2], [1.7, 0.1], [0.4, 2.2]];
        let x = [0.8, 0.6];
        let b = to_barycentric(&tri, &x).unwrap();
        let y = from_barycentric(&tri, &b);
        assert!((x[0] - y[0]).abs() < 1e-14 && (x[1] - y[1]).abs() < 1e-14);
    }

    #[test]
    fn gradients_sum_to_zero_and_match_coordinates() {
        let tet = [
            [0.1, 0.0, 0.2],
            [1.0, 0.3, 0.0],
            [0.0, 1.2, 0.1],
            [0.2, 0.1, 0.9],
        ];
        let g = barycentric_gradients(&tet).unwrap();
        for k in 0..3 {
            let s: f64 = g.iter().map(|v| v[k]).sum();
            assert!(s.abs() < 1e-14);
        }
        // grad(lambda_i) . (v_j - v_0) = delta_ij - delta_i0
        for (i, gi) in g.iter().enumerate() {
            for j in 1..4 {
                let d = [
                    tet[j][0] - tet[0][0],
                    tet[j][1] - tet[0][1],
                    tet[j][2] - tet[0][2],
                ];
                let expected = if i == j {
                    1.0
                } else if i == 0 {
                    -1.0
                } else {
                    0.0
                };
                assert!((dot(gi, &d) - expected).abs() < 1e-13);
            }
        }
    }
}
