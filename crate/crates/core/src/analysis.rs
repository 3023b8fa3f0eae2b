//! Error functionals, experimental orders of convergence and convergence studies
//! for the benchmark problems on the unit circle and the unit sphere.
//!
//! The benchmark solution is `u(x) = (x₁² - x₂²)/|x|²`, which is constant along
//! normals of the unit sphere and therefore its own closest-point extension.

use std::fmt;
use std::sync::Arc;

use crate::assembly::{assemble, weighted_squares, AssembledSystem, ScalarField, SurfaceProblem};
use crate::element::{evaluate, ElementOrder};
use crate::geometry::{LevelSetGeometry, PhaseFieldProfile};
use crate::mesh::{build_band_mesh, BackgroundGrid, DofMap, SimplicialBandMesh};
use crate::quadrature::{rule_for, QuadratureRule};
use crate::simplex::dot;
use crate::solver::{solve_cg, CgOptions, SolveReport};
use crate::{Error, Result};

/// Default resolution of the surface sampling rules.
pub const DEFAULT_SURFACE_SAMPLES: usize = 200;

/// `u(x) = (x₁² - x₂²)/|x|²`.
pub fn benchmark_solution<const D: usize>(x: &[f64; D]) -> f64 {
    (x[0] * x[0] - x[1] * x[1]) / dot(x, x)
}

/// `∇u` for [`benchmark_solution`]. It is tangential on every sphere `|x| = r`.
pub fn benchmark_gradient<const D: usize>(x: &[f64; D]) -> [f64; D] {
    let r2 = dot(x, x);
    let u = benchmark_solution(x);
    let mut g = [0.0; D];
    for (k, gk) in g.iter_mut().enumerate() {
        *gk = -2.0 * u * x[k] / r2;
    }
    g[0] += 2.0 * x[0] / r2;
    g[1] -= 2.0 * x[1] / r2;
    g
}

/// The benchmark surfaces with known solutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Benchmark {
    Circle,
    Sphere,
}

impl Benchmark {
    pub fn dimension(self) -> usize {
        match self {
            Self::Circle => 2,
            Self::Sphere => 3,
        }
    }

    /// `-Δ_Γ u = 4u` on the circle and `6u` on the sphere.
    fn eigenvalue(self) -> f64 {
        match self {
            Self::Circle => 4.0,
            Self::Sphere => 6.0,
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Circle => "circle",
            Self::Sphere => "sphere",
        })
    }
}

/// `f = -Δ_Γ u + u` for the benchmark solution, valid on the unit sphere.
pub fn manufactured_source<const D: usize>(benchmark: Benchmark) -> ScalarField<D> {
    assert_eq!(
        D,
        benchmark.dimension(),
        "{benchmark} lives in dimension {}",
        benchmark.dimension()
    );
    let factor = benchmark.eigenvalue() + 1.0;
    Arc::new(move |p: &[f64; D]| factor * benchmark_solution(p))
}

/// `-Δ_Γ u + u = f` with the benchmark solution attached.
pub fn benchmark_problem<const D: usize>(benchmark: Benchmark) -> SurfaceProblem<D> {
    let f = manufactured_source::<D>(benchmark);
    SurfaceProblem::new(move |p| f(p))
        .with_exact_solution(benchmark_solution::<D>, benchmark_gradient::<D>)
}

/// `E1 = ε⁻¹ Σ_T Q_T[ρ |I_h u^e - u_h|²]` and `E2`, the same with gradients.
pub fn error_e1_e2<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    dofs: &DofMap<D>,
    rule: &QuadratureRule,
    profile: &PhaseFieldProfile,
    geometry: &LevelSetGeometry<D>,
    u_h: &[f64],
    problem: &SurfaceProblem<D>,
) -> Result<(f64, f64)> {
    let u = problem
        .exact_solution()
        .ok_or(Error::MissingExactSolution)?;
    if u_h.len() != dofs.n_dofs() {
        return Err(Error::DimensionMismatch {
            expected: dofs.n_dofs(),
            found: u_h.len(),
        });
    }
    let mut diff = Vec::with_capacity(u_h.len());
    for (node, (x, uh)) in dofs.nodes().iter().zip(u_h).enumerate() {
        let p = geometry
            .closest_point(x)
            .map_err(|e| Error::DataExtension {
                node,
                source: Box::new(e),
            })?;
        diff.push(u(&p) - uh);
    }
    weighted_squares(mesh, dofs, rule, profile, geometry, &diff)
}

/// Value and gradient of a finite element function at a point of the band.
pub fn evaluate_at<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    dofs: &DofMap<D>,
    coefficients: &[f64],
    x: &[f64; D],
) -> Result<(f64, [f64; D])> {
    let (t, bary) = mesh.locate_point(x)?;
    Ok(evaluate_in_element(mesh, dofs, coefficients, t, &bary))
}

fn evaluate_in_element<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    dofs: &DofMap<D>,
    coefficients: &[f64],
    t: usize,
    bary: &[f64],
) -> (f64, [f64; D]) {
    let n = dofs.n_local();
    let nb = D + 1;
    let mut values = [0.0; 10];
    let mut dlambda = [0.0; 40];
    evaluate(
        dofs.order(),
        D,
        bary,
        &mut values[..n],
        &mut dlambda[..n * nb],
    );
    let geo = mesh.element_geometry(t);
    let mut v = 0.0;
    let mut g = [0.0; D];
    for (k, &d) in dofs.element_dofs(t).iter().enumerate() {
        v += values[k] * coefficients[d];
        for (w, gl) in geo.grad_lambda().iter().enumerate() {
            let c = dlambda[k * nb + w] * coefficients[d];
            for i in 0..D {
                g[i] += c * gl[i];
            }
        }
    }
    (v, g)
}

/// `Σ_i w_i |u - u_h|²(x_i)` and `Σ_i w_i |∇_Γ u - ∇_Γ u_h|²(x_i)` over points of `Γ`.
///
/// `∇_Γ u_h = (I - ννᵀ)∇u_h` with the analytic unit normal `ν`.
pub fn surface_sample_errors<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    dofs: &DofMap<D>,
    geometry: &LevelSetGeometry<D>,
    u_h: &[f64],
    problem: &SurfaceProblem<D>,
    samples: &[([f64; D], f64)],
) -> Result<(f64, f64)> {
    let u = problem
        .exact_solution()
        .ok_or(Error::MissingExactSolution)?;
    let grad_u = problem
        .exact_surface_gradient()
        .ok_or(Error::MissingExactSolution)?;
    let (mut e3, mut e4) = (0.0, 0.0);
    for (index, (x, w)) in samples.iter().enumerate() {
        let (t, bary) = mesh.locate_point(x).map_err(|_| Error::SampleNotFound {
            index,
            point: x.to_vec(),
        })?;
        let (v, g) = evaluate_in_element(mesh, dofs, u_h, t, &bary);
        let nu = geometry.normal(x);
        let along = dot(&g, &nu);
        let exact = grad_u(x);
        let mut d2 = 0.0;
        for k in 0..D {
            let d = exact[k] - (g[k] - along * nu[k]);
            d2 += d * d;
        }
        e3 += w * (u(x) - v).powi(2);
        e4 += w * d2;
    }
    Ok((e3, e4))
}

/// `x_l = (cos 2πl/L, sin 2πl/L)` with weights `2π/L`.
pub fn circle_samples(l_count: usize) -> Vec<([f64; 2], f64)> {
    let w = 2.0 * std::f64::consts::PI / l_count as f64;
    (0..l_count)
        .map(|l| {
            let t = w * l as f64;
            ([t.cos(), t.sin()], w)
        })
        .collect()
}

/// Latitude-longitude points `x_{k,l}`, `0 <= k < 2L`, `0 <= l < L`, with
/// weights `(π/L)² sin(lπ/L)`.
pub fn sphere_samples(l_count: usize) -> Vec<([f64; 3], f64)> {
    let step = std::f64::consts::PI / l_count as f64;
    let mut out = Vec::with_capacity(2 * l_count * l_count);
    for k in 0..2 * l_count {
        let (sk, ck) = (k as f64 * step).sin_cos();
        for l in 0..l_count {
            let (sl, cl) = (l as f64 * step).sin_cos();
            out.push(([ck * sl, sk * sl, cl], step * step * sl));
        }
    }
    out
}

pub fn error_e3_e4_circle(
    mesh: &SimplicialBandMesh<2>,
    dofs: &DofMap<2>,
    geometry: &LevelSetGeometry<2>,
    u_h: &[f64],
    problem: &SurfaceProblem<2>,
    l_count: usize,
) -> Result<(f64, f64)> {
    surface_sample_errors(mesh, dofs, geometry, u_h, problem, &circle_samples(l_count))
}

pub fn error_e3_e4_sphere(
    mesh: &SimplicialBandMesh<3>,
    dofs: &DofMap<3>,
    geometry: &LevelSetGeometry<3>,
    u_h: &[f64],
    problem: &SurfaceProblem<3>,
    l_count: usize,
) -> Result<(f64, f64)> {
    surface_sample_errors(mesh, dofs, geometry, u_h, problem, &sphere_samples(l_count))
}

/// `eoc_k = ln(E_{k-1}/E_k) / ln(h_{k-1}/h_k)` for `k = 1, ..., n-1`.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != hs.len() {
        return Err(Error::DimensionMismatch {
            expected: hs.len(),
            found: errors.len(),
        });
    }
    if let Some(e) = errors.iter().find(|&&e| !(e > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "eoc needs positive errors, got {e}"
        )));
    }
    if hs.windows(2).any(|w| !(w[1] > 0.0 && w[1] < w[0])) {
        return Err(Error::InvalidInput(
            "mesh sizes must be positive and strictly decreasing".into(),
        ));
    }
    Ok(errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect())
}

/// One refinement level of a study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub epsilon: f64,
    /// `[E1, E2, E3, E4]`.
    pub errors: [f64; 4],
    /// Orders relative to the previous row; `None` on the first row.
    pub eocs: Option<[f64; 4]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub example: String,
    pub degree: usize,
    pub element_order: ElementOrder,
    pub gamma: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Build rows from per-level `(h, ε, errors)`, computing the EOC columns.
    pub fn from_levels(
        example: impl Into<String>,
        degree: usize,
        element_order: ElementOrder,
        gamma: f64,
        levels: &[(f64, f64, [f64; 4])],
    ) -> Result<Self> {
        let hs: Vec<f64> = levels.iter().map(|l| l.0).collect();
        let mut columns = Vec::with_capacity(4);
        for j in 0..4 {
            let errors: Vec<f64> = levels.iter().map(|l| l.2[j]).collect();
            columns.push(eoc(&errors, &hs)?);
        }
        let rows = levels
            .iter()
            .enumerate()
            .map(|(i, &(h, epsilon, errors))| ConvergenceRow {
                h,
                epsilon,
                errors,
                eocs: (i > 0).then(|| {
                    [
                        columns[0][i - 1],
                        columns[1][i - 1],
                        columns[2][i - 1],
                        columns[3][i - 1],
                    ]
                }),
            })
            .collect();
        Ok(Self {
            example: example.into(),
            degree,
            element_order,
            gamma,
            rows,
        })
    }

    /// EOC column `j` (0-based over E1..E4), one entry per transition.
    pub fn eoc_column(&self, j: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.eocs.map(|e| e[j]))
            .collect()
    }
}

/// Parameters of a convergence study on one of the benchmark surfaces.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub benchmark: Benchmark,
    /// Quadrature exactness degree, which also fixes the profile exponent.
    pub degree: usize,
    /// `ε = γ h`.
    pub gamma: f64,
    pub levels: usize,
    /// Coarsest grid spacing; each level halves it.
    pub h0: f64,
    pub element_order: ElementOrder,
    pub cg_tol: f64,
    pub surface_samples: usize,
}

impl StudyConfig {
    pub fn level_spacing(&self, level: usize) -> f64 {
        self.h0 / (1u64 << level) as f64
    }
}

/// Everything produced by a single discrete solve.
pub struct LevelSolution<const D: usize> {
    pub mesh: SimplicialBandMesh<D>,
    pub dofs: DofMap<D>,
    pub rule: QuadratureRule,
    pub profile: PhaseFieldProfile,
    pub system: AssembledSystem,
    pub u_h: Vec<f64>,
    pub report: SolveReport,
}

/// Mesh, assemble and solve at grid spacing `h`. Errors carry the failing stage.
pub fn solve_level<const D: usize>(
    geometry: &LevelSetGeometry<D>,
    problem: &SurfaceProblem<D>,
    degree: usize,
    gamma: f64,
    h: f64,
    order: ElementOrder,
    cg_tol: f64,
) -> std::result::Result<LevelSolution<D>, (&'static str, Error)> {
    let rule = rule_for(D, degree).map_err(|e| ("setup", e))?;
    let grid = BackgroundGrid::with_spacing(geometry.domain(), h).map_err(|e| ("setup", e))?;
    let profile = PhaseFieldProfile::new(degree, grid.h(), gamma).map_err(|e| ("setup", e))?;
    let mesh = build_band_mesh(&grid, geometry, &profile, &rule).map_err(|e| ("mesh", e))?;
    let dofs = DofMap::new(&mesh, order);
    let system =
        assemble(&mesh, &dofs, &rule, &profile, geometry, problem).map_err(|e| ("assembly", e))?;
    let (u_h, report) = solve_cg(
        &system.matrix,
        &system.rhs,
        &CgOptions::with_tolerance(cg_tol),
    )
    .map_err(|e| ("solve", e))?;
    if !report.is_acceptable() {
        return Err((
            "solve",
            Error::InvalidInput(format!(
                "conjugate gradients stopped ({:?}) at relative residual {:e} after {} iterations",
                report.stop, report.final_relative_residual, report.iterations
            )),
        ));
    }
    Ok(LevelSolution {
        mesh,
        dofs,
        rule,
        profile,
        system,
        u_h,
        report,
    })
}

fn level_errors<const D: usize>(
    geometry: &LevelSetGeometry<D>,
    problem: &SurfaceProblem<D>,
    config: &StudyConfig,
    level: usize,
    samples: &[([f64; D], f64)],
) -> Result<(f64, f64, [f64; 4])> {
    let wrap = |stage: &'static str, source: Error| Error::Level {
        level,
        stage,
        source: Box::new(source),
    };
    let h = config.level_spacing(level);
    let s = solve_level(
        geometry,
        problem,
        config.degree,
        config.gamma,
        h,
        config.element_order,
        config.cg_tol,
    )
    .map_err(|(stage, e)| wrap(stage, e))?;
    let (e1, e2) = error_e1_e2(
        &s.mesh, &s.dofs, &s.rule, &s.profile, geometry, &s.u_h, problem,
    )
    .map_err(|e| wrap("errors", e))?;
    let (e3, e4) = surface_sample_errors(&s.mesh, &s.dofs, geometry, &s.u_h, problem, samples)
        .map_err(|e| wrap("errors", e))?;
    Ok((s.mesh.h(), s.profile.epsilon(), [e1, e2, e3, e4]))
}

fn run_study<const D: usize>(
    geometry: LevelSetGeometry<D>,
    config: &StudyConfig,
    samples: Vec<([f64; D], f64)>,
) -> Result<ConvergenceTable> {
    let problem = benchmark_problem::<D>(config.benchmark);
    let levels = (0..config.levels)
        .map(|level| level_errors(&geometry, &problem, config, level, &samples))
        .collect::<Result<Vec<_>>>()?;
    ConvergenceTable::from_levels(
        config.benchmark.to_string(),
        config.degree,
        config.element_order,
        config.gamma,
        &levels,
    )
}

/// Solve on `levels` successively halved grids and tabulate E1-E4 with EOCs.
///
/// Levels run one after another; each is internally parallel and deterministic.
pub fn run_convergence_study(config: &StudyConfig) -> Result<ConvergenceTable> {
    if config.levels == 0 {
        return Err(Error::InvalidInput(
            "a study needs at least one level".into(),
        ));
    }
    if !(config.h0 > 0.0 && config.gamma > 1.0 && config.cg_tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need h0 > 0, gamma > 1 and cg_tol > 0 (h0 = {}, gamma = {}, cg_tol = {})",
            config.h0, config.gamma, config.cg_tol
        )));
    }
    match config.benchmark {
        Benchmark::Circle => run_study(
            LevelSetGeometry::circle(),
            config,
            circle_samples(config.surface_samples),
        ),
        Benchmark::Sphere => run_study(
            LevelSetGeometry::sphere(),
            config,
            sphere_samples(config.surface_samples),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eoc_examples() {
        let r = eoc(&[2.150e-05, 1.356e-06], &[0.0375, 0.01875]).unwrap();
        assert!((r[0] - 3.99).abs() < 0.005);
        assert_eq!(eoc(&[1.0, 1.0], &[0.1, 0.05]).unwrap(), vec![0.0]);
        assert!((eoc(&[16.0, 1.0], &[0.2, 0.1]).unwrap()[0] - 4.0).abs() < 1e-15);
        assert!(eoc(&[1.0, 0.0], &[0.2, 0.1]).is_err());
        assert!(eoc(&[1.0, 2.0], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn source_values_and_antisymmetry() {
        let fc = manufactured_source::<2>(Benchmark::Circle);
        let fs = manufactured_source::<3>(Benchmark::Sphere);
        assert!((fc(&[1.0, 0.0]) - 5.0).abs() < 1e-15);
        assert!((fs(&[1.0, 0.0, 0.0]) - 7.0).abs() < 1e-15);
        let p = [0.6, 0.8];
        assert!((fc(&p) + fc(&[-p[1], p[0]])).abs() < 1e-15);
    }

    #[test]
    fn circle_laplace_beltrami_by_finite_differences() {
        // u(θ) = u(cos θ, sin θ); -u'' + u must equal f on the circle.
        let f = manufactured_source::<2>(Benchmark::Circle);
        let u = |t: f64| benchmark_solution(&[t.cos(), t.sin()]);
        let n = 1000;
        let dt = 2.0 * PI / n as f64;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let t = i as f64 * dt;
            let lap = (u(t + dt) - 2.0 * u(t) + u(t - dt)) / (dt * dt);
            worst = worst.max((-lap + u(t) - f(&[t.cos(), t.sin()])).abs());
        }
        assert!(worst < 1e-4, "max deviation {worst}");
    }

    #[test]
    fn benchmark_gradient_is_tangential_and_matches_differences() {
        let x = [0.3, -0.5, 0.81];
        let g = benchmark_gradient(&x);
        assert!(dot(&g, &x).abs() < 1e-14);
        let d = 1e-6;
        for k in 0..3 {
            let mut a = x;
            let mut b = x;
            a[k] += d;
            b[k] -= d;
            let fd = (benchmark_solution(&a) - benchmark_solution(&b)) / (2.0 * d);
            assert!((fd - g[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn sample_rules_integrate_constants() {
        let c: f64 = circle_samples(200).iter().map(|s| s.1).sum();
        assert!((c - 2.0 * PI).abs() < 1e-12);
        let s200: f64 = sphere_samples(200).iter().map(|s| s.1).sum();
        let s400: f64 = sphere_samples(400).iter().map(|s| s.1).sum();
        let (e200, e400) = ((s200 - 4.0 * PI).abs(), (s400 - 4.0 * PI).abs());
        assert!(e200 < 1e-3);
        assert!((e200 / e400 - 4.0).abs() < 0.1);
    }

    #[test]
    fn table_from_levels() {
        let t = ConvergenceTable::from_levels(
            "circle",
            6,
            ElementOrder::Linear,
            5.333,
            &[
                (0.1, 0.5, [16.0, 4.0, 16.0, 4.0]),
                (0.05, 0.25, [1.0, 1.0, 1.0, 1.0]),
            ],
        )
        .unwrap();
        assert!(t.rows[0].eocs.is_none());
        assert_eq!(t.rows[1].eocs.unwrap(), [4.0, 2.0, 4.0, 2.0]);
    }
}
