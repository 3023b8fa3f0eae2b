use std::f64::consts::{FRAC_PI_2, PI};

use super::LevelSetGeometry;
use crate::{Error, Result};

/// Profile `σ(r) = cos^{2(q+1)}(r)` on `|r| < π/2`, zero elsewhere.
pub fn sigma(q: usize, r: f64) -> f64 {
    if r.abs() >= FRAC_PI_2 {
        return 0.0;
    }
    let c = r.cos();
    (c * c).powi(q as i32 + 1)
}

/// `ĉ = ∫σ = π binom(2q+2, q+1) / 4^{q+1}`.
pub fn profile_mass(q: usize) -> f64 {
    let m = q + 1;
    // binom(2m, m) / 4^m as a running product of (2k-1)/(2k)
    let ratio: f64 = (1..=m)
        .map(|k| (2 * k - 1) as f64 / (2 * k) as f64)
        .product();
    PI * ratio
}

/// Phase field `ρ = σ(φ/ε)` with `ε = γ h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseFieldProfile {
    degree: usize,
    epsilon: f64,
    gamma: f64,
}

impl PhaseFieldProfile {
    pub fn new(degree: usize, h: f64, gamma: f64) -> Result<Self> {
        if degree == 0 || !(h > 0.0) || !(gamma > 0.0) {
            return Err(Error::InvalidInput(format!(
                "profile needs q >= 1, h > 0, gamma > 0 (got q = {degree}, h = {h}, gamma = {gamma})"
            )));
        }
        Ok(Self {
            degree,
            epsilon: gamma * h,
            gamma,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `σ(φ/ε)` for a given level-set value.
    pub fn rho_of_level(&self, phi: f64) -> f64 {
        sigma(self.degree, phi / self.epsilon)
    }

    pub fn rho<const D: usize>(&self, geometry: &LevelSetGeometry<D>, x: &[f64; D]) -> f64 {
        self.rho_of_level(geometry.phi(x))
    }

    pub fn support_half_width(&self) -> f64 {
        self.epsilon * FRAC_PI_2
    }
}
