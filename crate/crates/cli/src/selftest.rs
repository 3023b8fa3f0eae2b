//! Fast end-to-end checks runnable from the command line.

use phasefield::assembly::{assemble, SurfaceProblem};
use phasefield::element::ElementOrder;
use phasefield::geometry::{LevelSetGeometry, PhaseFieldProfile};
use phasefield::mesh::{build_band_mesh, BackgroundGrid, DofMap, SimplicialBandMesh};
use phasefield::quadrature::{rule_for, QuadratureRule};
use phasefield::simplex::factorial;
use phasefield::solver::{solve_cg, CgOptions};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

const PAIRS: [(usize, usize); 6] = [(2, 1), (2, 2), (2, 6), (3, 1), (3, 2), (3, 6)];

/// All exponent tuples of length `n` with total degree at most `max`.
fn exponents(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=max {
        for mut rest in exponents(n - 1, max - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Worst relative error over barycentric monomials of degree `<= q`.
///
/// The mean of `Π λᵢ^{aᵢ}` over a `d`-simplex is `d! Π aᵢ! / (d + Σ aᵢ)!`.
pub fn quadrature_exactness(rule: &QuadratureRule) -> f64 {
    let d = rule.dimension();
    let mut worst: f64 = 0.0;
    for alpha in exponents(d + 1, rule.degree()) {
        let total: usize = alpha.iter().sum();
        let exact = factorial(d) * alpha.iter().map(|&a| factorial(a)).product::<f64>()
            / factorial(d + total);
        let approx = rule.apply_barycentric(|b| {
            b.iter()
                .zip(&alpha)
                .map(|(l, &a)| l.powi(a as i32))
                .product()
        });
        worst = worst.max((approx - exact).abs() / exact);
    }
    worst
}

/// `min ρ(b_{i,T}) - (h/ε)^{2(q+1)}` over all quadrature points of the mesh.
pub fn rho_bound_margin<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    rule: &QuadratureRule,
    profile: &PhaseFieldProfile,
    geometry: &LevelSetGeometry<D>,
) -> f64 {
    let bound = (mesh.h() / profile.epsilon()).powi(2 * (profile.degree() as i32 + 1));
    let mut min_rho = f64::INFINITY;
    for t in 0..mesh.n_simplices() {
        let geo = mesh.element_geometry(t);
        for (b, _) in rule.iter() {
            min_rho = min_rho.min(profile.rho(geometry, &geo.point(b)));
        }
    }
    min_rho - bound
}

/// Solve with `f = 1` and return `max |u_h - 1|` together with the ρ margin.
fn constant_solution<const D: usize>(
    geometry: &LevelSetGeometry<D>,
    cells: usize,
    q: usize,
    order: ElementOrder,
    tol: f64,
) -> Result<(f64, f64), String> {
    let grid = BackgroundGrid::with_cells(geometry.domain(), cells).map_err(|e| e.to_string())?;
    let profile = PhaseFieldProfile::new(q, grid.h(), 16.0 / 3.0).map_err(|e| e.to_string())?;
    let rule = rule_for(D, q).map_err(|e| e.to_string())?;
    let mesh = build_band_mesh(&grid, geometry, &profile, &rule).map_err(|e| e.to_string())?;
    let dofs = DofMap::new(&mesh, order);
    let problem = SurfaceProblem::new(|_| 1.0);
    let system =
        assemble(&mesh, &dofs, &rule, &profile, geometry, &problem).map_err(|e| e.to_string())?;
    let (u, _) = solve_cg(&system.matrix, &system.rhs, &CgOptions::with_tolerance(tol))
        .map_err(|e| e.to_string())?;
    let deviation = u.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    Ok((
        deviation,
        rho_bound_margin(&mesh, &rule, &profile, geometry),
    ))
}

pub fn run_all() -> Vec<Check> {
    let mut checks = Vec::new();
    for (d, q) in PAIRS {
        let check = match rule_for(d, q) {
            Ok(rule) => {
                let worst = quadrature_exactness(&rule);
                let positive = rule.weights().iter().all(|&w| w > 0.0);
                Check {
                    name: format!("quadrature d={d} q={q}"),
                    passed: worst <= 1e-12 && positive,
                    detail: format!("{} points, worst relative error {worst:.2e}", rule.len()),
                }
            }
            Err(e) => Check {
                name: format!("quadrature d={d} q={q}"),
                passed: false,
                detail: e.to_string(),
            },
        };
        checks.push(check);
    }
    let tol = 1e-12;
    let cases = [
        (
            "circle P1",
            constant_solution(
                &LevelSetGeometry::circle(),
                32,
                2,
                ElementOrder::Linear,
                tol,
            ),
        ),
        (
            "circle P1 q=6",
            constant_solution(
                &LevelSetGeometry::circle(),
                32,
                6,
                ElementOrder::Linear,
                tol,
            ),
        ),
        (
            "sphere P1",
            constant_solution(
                &LevelSetGeometry::sphere(),
                24,
                2,
                ElementOrder::Linear,
                tol,
            ),
        ),
    ];
    for (label, result) in cases {
        match result {
            Ok((deviation, margin)) => {
                checks.push(Check {
                    name: format!("constant solution, {label}"),
                    passed: deviation <= 10.0 * tol,
                    detail: format!("max |u_h - 1| = {deviation:.2e}"),
                });
                checks.push(Check {
                    name: format!("rho lower bound, {label}"),
                    passed: margin >= -1e-14,
                    detail: format!("min rho - (h/eps)^(2(q+1)) = {margin:.3e}"),
                });
            }
            Err(e) => checks.push(Check {
                name: format!("constant solution, {label}"),
                passed: false,
                detail: e,
            }),
        }
    }
    checks
}
