use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

/// Root `r0 ∈ (0, 1)` of `arccos(r) - c1 r`, by bisection.
///
/// The function falls strictly from `π/2` at `r = 0` to `-c1` at `r = 1`.
pub fn compute_r0(c1: f64) -> f64 {
    assert!(c1 > 0.0, "c1 must be positive");
    let f = |r: f64| r.acos() - c1 * r;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Thresholds of the band selection for a mesh size `h` and width `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandParameters {
    pub h: f64,
    pub epsilon: f64,
    /// Selection threshold `ε arccos(h/ε)` on `|φ|` at quadrature points.
    pub half_width: f64,
    /// `ε arccos(h/ε) - c1 h`: the band contains `{|φ| < hat_epsilon}`.
    pub hat_epsilon: f64,
    pub c2: f64,
    pub r0: f64,
}

impl BandParameters {
    /// Whether `h/ε < r0`, which guarantees `hat_epsilon > 0`.
    pub fn gamma_admissible(&self) -> bool {
        self.h / self.epsilon < self.r0
    }

    /// Outer bound `c2 ε` of the band in `|φ|`.
    pub fn outer_bound(&self) -> f64 {
        self.c2 * self.epsilon
    }
}

pub fn band_parameters(h: f64, epsilon: f64, c1: f64) -> Result<BandParameters> {
    if !(h > 0.0) || !(h < epsilon) {
        return Err(Error::BandTooNarrow { h, epsilon });
    }
    let half_width = epsilon * (h / epsilon).acos();
    Ok(BandParameters {
        h,
        epsilon,
        half_width,
        hat_epsilon: half_width - c1 * h,
        c2: FRAC_PI_2 + c1,
        r0: compute_r0(c1),
    })
}
