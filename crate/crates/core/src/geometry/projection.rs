use super::LevelSet;
use crate::simplex::{dot, norm};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            tolerance: 1e-12,
        }
    }
}

/// Residuals `(|φ(p)| / |∇φ(p)|, |tangential part of x - p|)`.
fn residuals<const D: usize, L: LevelSet<D> + ?Sized>(
    ls: &L,
    x: &[f64; D],
    p: &[f64; D],
) -> (f64, f64) {
    let g = ls.gradient(p);
    let gn = norm(&g);
    let mut d = [0.0; D];
    for k in 0..D {
        d[k] = x[k] - p[k];
    }
    let along = dot(&d, &g) / (gn * gn);
    let mut t = d;
    for k in 0..D {
        t[k] -= along * g[k];
    }
    (ls.value(p).abs() / gn, norm(&t))
}

/// Closest point on `{φ = 0}` by damped Newton iteration on
/// `x - p - λ∇φ(p) = 0`, `φ(p) = 0`.
///
/// Starts from the first-order step `p = x - φ(x)∇φ(x)/|∇φ(x)|²`.
pub fn newton_closest_point<const D: usize, L: LevelSet<D> + ?Sized>(
    ls: &L,
    x: &[f64; D],
    options: &NewtonOptions,
) -> Result<[f64; D]> {
    let scale = 1.0 + norm(x);
    let g = ls.gradient(x);
    let g2 = dot(&g, &g);
    let failure = |p: &[f64; D], iterations| {
        let (level_residual, alignment_residual) = residuals(ls, x, p);
        Error::ProjectionFailed {
            point: x.to_vec(),
            iterations,
            level_residual,
            alignment_residual,
        }
    };
    if g2 == 0.0 || !g2.is_finite() {
        return Err(failure(x, 0));
    }
    let phi = ls.value(x);
    let mut p = *x;
    for k in 0..D {
        p[k] -= phi * g[k] / g2;
    }
    let gp = ls.gradient(&p);
    let mut lambda = {
        let mut d = [0.0; D];
        for k in 0..D {
            d[k] = x[k] - p[k];
        }
        dot(&d, &gp) / dot(&gp, &gp)
    };

    // F(p, λ) = (x - p - λ∇φ(p), φ(p)); unknowns stacked as [p, λ].
    let residual = |p: &[f64; D], lambda: f64| -> (Vec<f64>, f64) {
        let g = ls.gradient(p);
        let mut r = Vec::with_capacity(D + 1);
        for k in 0..D {
            r.push(x[k] - p[k] - lambda * g[k]);
        }
        r.push(ls.value(p) / norm(&g).max(f64::MIN_POSITIVE));
        let n = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        (r, n)
    };

    for iteration in 0..=options.max_iterations {
        let (level, align) = residuals(ls, x, &p);
        if level <= options.tolerance * scale && align <= options.tolerance * scale {
            return Ok(p);
        }
        if iteration == options.max_iterations {
            break;
        }
        let (r, rnorm) = residual(&p, lambda);
        let g = ls.gradient(&p);
        let gn = norm(&g);
        let hess = ls.hessian(&p);
        // Jacobian of F; the last row is d(φ/|∇φ|) ≈ ∇φ/|∇φ| near the surface.
        let n = D + 1;
        let mut jac = vec![vec![0.0; n]; n];
        for r_ in 0..D {
            for c in 0..D {
                jac[r_][c] = -lambda * hess[r_][c] - if r_ == c { 1.0 } else { 0.0 };
            }
            jac[r_][D] = -g[r_];
            jac[D][r_] = g[r_] / gn;
        }
        let delta = match solve_dense(jac, r.iter().map(|v| -v).collect()) {
            Some(d) => d,
            None => return Err(failure(&p, iteration)),
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = p;
            for k in 0..D {
                trial[k] += step * delta[k];
            }
            let trial_lambda = lambda + step * delta[D];
            let (_, tnorm) = residual(&trial, trial_lambda);
            if tnorm.is_finite() && (tnorm < rnorm || tnorm <= options.tolerance * scale) {
                p = trial;
                lambda = trial_lambda;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Stagnation at round-off: accept if the residuals are close to tolerance.
            let (level, align) = residuals(ls, x, &p);
            if level <= 1e3 * options.tolerance * scale && align <= 1e3 * options.tolerance * scale
            {
                return Ok(p);
            }
            return Err(failure(&p, iteration));
        }
    }
    Err(failure(&p, options.max_iterations))
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(p, c);
        b.swap(p, c);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ImplicitFunction, Pretzel, UnitSphere};

    #[test]
    fn sphere_analytic_projection() {
        let s = UnitSphere::<3>;
        assert_eq!(s.closest_point(&[0.0, 0.0, 0.5]).unwrap(), [0.0, 0.0, 1.0]);
        let c = UnitSphere::<2>;
        assert_eq!(c.closest_point(&[2.0, 0.0]).unwrap(), [1.0, 0.0]);
    }

    #[test]
    fn newton_matches_radial_projection() {
        let s = UnitSphere::<3>;
        let x = [0.3, -0.9, 0.4];
        let p = newton_closest_point(&s, &x, &NewtonOptions::default()).unwrap();
        let r = norm(&x);
        for k in 0..3 {
            assert!((p[k] - x[k] / r).abs() < 1e-12);
        }
    }

    #[test]
    fn pretzel_projection_residuals() {
        let p = Pretzel;
        // march from the origin outward along a ray until φ changes sign
        let dir = [0.6, 0.5, 0.62];
        let mut t = 0.5;
        while p.value(&dir.map(|d| d * t)) > 0.0 {
            t += 0.01;
        }
        let x = dir.map(|d| d * (t + 0.005));
        let q = p.closest_point(&x).unwrap();
        let (level, align) = residuals(&p, &x, &q);
        assert!(p.value(&q).abs() <= 1e-10);
        assert!(level <= 1e-12 && align <= 1e-8);
    }

    #[test]
    fn failure_reports_residuals() {
        // φ = x² + y² + 1 has no zero set.
        let ls = ImplicitFunction::<2>::new(
            |x| x[0] * x[0] + x[1] * x[1] + 1.0,
            |x| [2.0 * x[0], 2.0 * x[1]],
        );
        let err = newton_closest_point(&ls, &[0.5, 0.5], &NewtonOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ProjectionFailed { .. }));
    }
}
