//! Implicit surfaces `Γ = {φ = 0}` and the quantities derived from them.

mod band;
mod profile;
mod projection;

use std::fmt;
use std::sync::Arc;

pub use band::{band_parameters, compute_r0, BandParameters};
pub use profile::{profile_mass, sigma, PhaseFieldProfile};
pub use projection::{newton_closest_point, NewtonOptions};

use crate::simplex::norm;
use crate::Result;

/// A smooth level-set function on `R^D`.
pub trait LevelSet<const D: usize>: Send + Sync {
    fn value(&self, x: &[f64; D]) -> f64;

    fn gradient(&self, x: &[f64; D]) -> [f64; D];

    /// Second derivatives. Defaults to central differences of [`Self::gradient`].
    fn hessian(&self, x: &[f64; D]) -> [[f64; D]; D] {
        let step = 1e-6 * (1.0 + norm(x));
        let mut hess = [[0.0; D]; D];
        for c in 0..D {
            let mut xp = *x;
            let mut xm = *x;
            xp[c] += step;
            xm[c] -= step;
            let gp = self.gradient(&xp);
            let gm = self.gradient(&xm);
            for r in 0..D {
                hess[r][c] = (gp[r] - gm[r]) / (2.0 * step);
            }
        }
        // symmetrize the difference quotient
        for r in 0..D {
            for c in r + 1..D {
                let m = 0.5 * (hess[r][c] + hess[c][r]);
                hess[r][c] = m;
                hess[c][r] = m;
            }
        }
        hess
    }

    /// Closest point on the zero level set.
    fn closest_point(&self, x: &[f64; D]) -> Result<[f64; D]> {
        newton_closest_point(self, x, &NewtonOptions::default())
    }
}

/// `φ(x) = |x|² - 1`: the unit circle for `D = 2`, the unit sphere for `D = 3`.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitSphere<const D: usize>;

impl<const D: usize> LevelSet<D> for UnitSphere<D> {
    fn value(&self, x: &[f64; D]) -> f64 {
        x.iter().map(|c| c * c).sum::<f64>() - 1.0
    }

    fn gradient(&self, x: &[f64; D]) -> [f64; D] {
        x.map(|c| 2.0 * c)
    }

    fn hessian(&self, _x: &[f64; D]) -> [[f64; D]; D] {
        let mut h = [[0.0; D]; D];
        for (k, row) in h.iter_mut().enumerate() {
            row[k] = 2.0;
        }
        h
    }

    fn closest_point(&self, x: &[f64; D]) -> Result<[f64; D]> {
        let r = norm(x);
        if r == 0.0 {
            return Err(crate::Error::ProjectionFailed {
                point: x.to_vec(),
                iterations: 0,
                level_residual: 1.0,
                alignment_residual: f64::NAN,
            });
        }
        Ok(x.map(|c| c / r))
    }
}

/// The quartic "pretzel" surface
/// `Σ_i (x_i² - 1)² + Σ_{i<j} (x_i² + x_j² - 3)² - 10`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Pretzel;

impl LevelSet<3> for Pretzel {
    fn value(&self, x: &[f64; 3]) -> f64 {
        let [a, b, c] = x.map(|v| v * v);
        (a - 1.0).powi(2)
            + (b - 1.0).powi(2)
            + (c - 1.0).powi(2)
            + (a + b - 3.0).powi(2)
            + (a + c - 3.0).powi(2)
            + (b + c - 3.0).powi(2)
            - 10.0
    }

    fn gradient(&self, x: &[f64; 3]) -> [f64; 3] {
        let s = x.map(|v| v * v);
        let mut g = [0.0; 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            g[i] = 4.0 * x[i] * ((s[i] - 1.0) + (s[i] + s[j] - 3.0) + (s[i] + s[k] - 3.0));
        }
        g
    }

    fn hessian(&self, x: &[f64; 3]) -> [[f64; 3]; 3] {
        let s = x.map(|v| v * v);
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            h[i][i] = 4.0 * (3.0 * s[i] - 7.0 + s[j] + s[k]) + 24.0 * s[i];
            for &m in &[j, k] {
                h[i][m] = 8.0 * x[i] * x[m];
            }
        }
        h
    }
}

type ValueFn<const D: usize> = dyn Fn(&[f64; D]) -> f64 + Send + Sync;
type GradientFn<const D: usize> = dyn Fn(&[f64; D]) -> [f64; D] + Send + Sync;

/// A level set given by closures. The closest point uses Newton's method.
#[derive(Clone)]
pub struct ImplicitFunction<const D: usize> {
    value: Arc<ValueFn<D>>,
    gradient: Arc<GradientFn<D>>,
}

impl<const D: usize> ImplicitFunction<D> {
    pub fn new(
        value: impl Fn(&[f64; D]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64; D]) -> [f64; D] + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }
}

impl<const D: usize> LevelSet<D> for ImplicitFunction<D> {
    fn value(&self, x: &[f64; D]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64; D]) -> [f64; D] {
        (self.gradient)(x)
    }
}

/// Axis-aligned box `Ω = Π (lower_k, upper_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainBox<const D: usize> {
    pub lower: [f64; D],
    pub upper: [f64; D],
}

impl<const D: usize> DomainBox<D> {
    /// The cube `(-half_width, half_width)^D`.
    pub fn centered_cube(half_width: f64) -> Self {
        Self {
            lower: [-half_width; D],
            upper: [half_width; D],
        }
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn contains(&self, x: &[f64; D]) -> bool {
        (0..D).all(|k| x[k] >= self.lower[k] && x[k] <= self.upper[k])
    }

    /// Regular lattice of `n + 1` points per axis, in lexicographic order.
    pub fn lattice(&self, n: usize) -> Vec<[f64; D]> {
        let total = (n + 1).pow(D as u32);
        (0..total)
            .map(|mut id| {
                let mut x = [0.0; D];
                for k in 0..D {
                    let i = id % (n + 1);
                    id /= n + 1;
                    x[k] = self.lower[k] + self.extent(k) * i as f64 / n as f64;
                }
                x
            })
            .collect()
    }

    /// Largest `|x|` over the closed box.
    pub fn max_norm(&self) -> f64 {
        (0..D)
            .map(|k| self.lower[k].abs().max(self.upper[k].abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceKind {
    Circle,
    Sphere,
    Pretzel,
    Custom(String),
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceKind::Circle => f.write_str("circle"),
            SurfaceKind::Sphere => f.write_str("sphere"),
            SurfaceKind::Pretzel => f.write_str("pretzel"),
            SurfaceKind::Custom(name) => f.write_str(name),
        }
    }
}

/// A level set together with its bounding box and gradient bounds `c0 <= |∇φ| <= c1`.
#[derive(Clone)]
pub struct LevelSetGeometry<const D: usize> {
    kind: SurfaceKind,
    level_set: Arc<dyn LevelSet<D>>,
    domain: DomainBox<D>,
    c0: f64,
    c1: f64,
}

impl<const D: usize> fmt::Debug for LevelSetGeometry<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevelSetGeometry")
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("c0", &self.c0)
            .field("c1", &self.c1)
            .finish()
    }
}

/// Sampling resolution (lattice cells per axis) used to estimate gradient bounds.
const GRADIENT_SAMPLES_2D: usize = 400;
const GRADIENT_SAMPLES_3D: usize = 100;

/// Level-set band `|φ| <= PRETZEL_BAND` over which the pretzel bounds are sampled.
const PRETZEL_BAND: f64 = 1.0;

impl LevelSetGeometry<2> {
    /// Unit circle on `Ω = (-1.2, 1.2)²`.
    pub fn circle() -> Self {
        Self::unit_sphere(SurfaceKind::Circle, DomainBox::centered_cube(1.2))
    }
}

impl LevelSetGeometry<3> {
    /// Unit sphere on `Ω = (-1.8, 1.8)³`.
    pub fn sphere() -> Self {
        Self::unit_sphere(SurfaceKind::Sphere, DomainBox::centered_cube(1.8))
    }

    /// The pretzel surface on `Ω = (-2, 2)³`.
    pub fn pretzel() -> Self {
        let mut geometry = Self::custom(
            "pretzel",
            Pretzel,
            DomainBox::centered_cube(2.0),
            PRETZEL_BAND,
        );
        geometry.kind = SurfaceKind::Pretzel;
        geometry
    }
}

impl<const D: usize> LevelSetGeometry<D> {
    fn unit_sphere(kind: SurfaceKind, domain: DomainBox<D>) -> Self {
        // c1 is the global maximum of 2|x| on the closed box; c0 is the
        // minimum over the band |φ| <= 1/2.
        Self {
            kind,
            level_set: Arc::new(UnitSphere::<D>),
            c0: 2.0 * 0.5f64.sqrt(),
            c1: 2.0 * domain.max_norm(),
            domain,
        }
    }

    /// A user-supplied level set. Gradient bounds are sampled on a lattice
    /// restricted to `|φ| <= band`, with a 10% safety margin on either side.
    pub fn custom(
        name: &str,
        level_set: impl LevelSet<D> + 'static,
        domain: DomainBox<D>,
        band: f64,
    ) -> Self {
        let n = if D == 2 {
            GRADIENT_SAMPLES_2D
        } else {
            GRADIENT_SAMPLES_3D
        };
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for x in domain.lattice(n) {
            if level_set.value(&x).abs() <= band {
                let g = norm(&level_set.gradient(&x));
                lo = lo.min(g);
                hi = hi.max(g);
            }
        }
        if !lo.is_finite() {
            lo = 0.0;
        }
        Self {
            kind: SurfaceKind::Custom(name.to_string()),
            level_set: Arc::new(level_set),
            domain,
            c0: 0.9 * lo,
            c1: 1.1 * hi,
        }
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    pub fn domain(&self) -> &DomainBox<D> {
        &self.domain
    }

    pub fn level_set(&self) -> &dyn LevelSet<D> {
        self.level_set.as_ref()
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn phi(&self, x: &[f64; D]) -> f64 {
        self.level_set.value(x)
    }

    pub fn grad_phi(&self, x: &[f64; D]) -> [f64; D] {
        self.level_set.gradient(x)
    }

    /// Unit normal `∇φ/|∇φ|`.
    pub fn normal(&self, x: &[f64; D]) -> [f64; D] {
        let g = self.grad_phi(x);
        let n = norm(&g);
        g.map(|c| c / n)
    }

    pub fn closest_point(&self, x: &[f64; D]) -> Result<[f64; D]> {
        self.level_set.closest_point(x)
    }

    /// The generic Newton projection, bypassing any closed form.
    pub fn newton_closest_point(&self, x: &[f64; D]) -> Result<[f64; D]> {
        newton_closest_point(self.level_set.as_ref(), x, &NewtonOptions::default())
    }

    /// Smallest admissible `γ = ε/h`: the band lemma needs `γ > 1/r0(c1)`.
    pub fn min_gamma(&self) -> f64 {
        1.0 / compute_r0(self.c1)
    }
}
