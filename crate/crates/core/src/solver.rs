//! Conjugate gradients with optional diagonal (Jacobi) preconditioning.

use crate::sparse::{dot, norm2, CsrMatrix};
use crate::{Error, Result};

/// How often the recursively updated residual is replaced by `b - A x`.
const RESIDUAL_REFRESH: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Clone, Copy, Debug)]
pub struct CgOptions {
    pub rel_tol: f64,
    /// `None` means ten times the system size.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iter: None,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

impl CgOptions {
    pub fn with_tolerance(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Why the iteration ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The true residual met the tolerance.
    Converged,
    /// The recursive residual met the tolerance but the true residual, limited
    /// by rounding in `A x`, did not.
    RoundingFloor,
    IterationLimit,
    /// `pᵀ A p <= 0`: the matrix is not positive definite in floating point.
    Breakdown,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `|b - A x|₂ / |b|₂` for the returned iterate.
    pub final_relative_residual: f64,
    pub converged: bool,
    pub stop: StopReason,
}

impl SolveReport {
    /// Converged, or stopped at the best accuracy attainable in floating point.
    pub fn is_acceptable(&self) -> bool {
        matches!(self.stop, StopReason::Converged | StopReason::RoundingFloor)
    }
}

/// Solve `A x = b` for symmetric positive definite `A`, starting from zero.
///
/// Iteration stops when the recursive residual meets the tolerance, when the
/// true residual (checked every 50 iterations) does, or at the iteration limit.
/// `converged` means `|b - A x|₂ <= rel_tol |b|₂` for the true residual, so a
/// system whose rounding floor lies above `rel_tol` returns its best iterate
/// with `converged = false`.
pub fn solve_cg(
    matrix: &CsrMatrix,
    rhs: &[f64],
    options: &CgOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = matrix.n_rows();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    if !(options.rel_tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "rel_tol must be positive, got {}",
            options.rel_tol
        )));
    }
    let inv_diag: Vec<f64> = match options.preconditioner {
        Preconditioner::None => vec![1.0; n],
        Preconditioner::Jacobi => {
            let diag = matrix.diagonal();
            if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "non-positive diagonal entry at row {i}"
                )));
            }
            diag.iter().map(|d| 1.0 / d).collect()
        }
    };
    let max_iter = options.max_iter.unwrap_or(10 * n.max(1));
    let b_norm = norm2(rhs);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                final_relative_residual: 0.0,
                converged: true,
                stop: StopReason::Converged,
            },
        ));
    }
    let target = options.rel_tol * b_norm;

    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;

    let true_residual = |x: &[f64], r: &mut [f64], scratch: &mut [f64]| {
        matrix.mul_vec_into(x, scratch);
        for i in 0..n {
            r[i] = rhs[i] - scratch[i];
        }
        norm2(r)
    };

    let mut r_true = vec![0.0; n];
    let mut stop = StopReason::IterationLimit;
    while iterations < max_iter {
        matrix.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            stop = StopReason::Breakdown;
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        let recursive_done = norm2(&r) <= target;
        if recursive_done || iterations % RESIDUAL_REFRESH == 0 {
            // The recursive residual is never replaced; the true one decides termination.
            let true_norm = true_residual(&x, &mut r_true, &mut ap);
            if true_norm <= target {
                stop = StopReason::Converged;
                break;
            }
            if recursive_done {
                // past this point the recursive residual only tracks rounding noise
                stop = StopReason::RoundingFloor;
                break;
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let relative = true_residual(&x, &mut r_true, &mut ap) / b_norm;
    Ok((
        x,
        SolveReport {
            iterations,
            final_relative_residual: relative,
            converged: relative <= options.rel_tol,
            stop,
        },
    ))
}
