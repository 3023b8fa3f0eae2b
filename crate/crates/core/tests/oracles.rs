//! Whole-pipeline checks against independently computed reference values.

use std::f64::consts::PI;

use phasefield::analysis::{
    benchmark_problem, error_e1_e2, error_e3_e4_circle, error_e3_e4_sphere, evaluate_at,
    run_convergence_study, solve_level, Benchmark, StudyConfig,
};
use phasefield::assembly::{assemble, weighted_squares, SurfaceProblem};
use phasefield::element::ElementOrder;
use phasefield::geometry::{LevelSetGeometry, PhaseFieldProfile};
use phasefield::mesh::{build_band_mesh, BackgroundGrid, DofMap};
use phasefield::quadrature::rule_for;
use phasefield::solver::{solve_cg, CgOptions, Preconditioner};

const GAMMA: f64 = 16.0 / 3.0;

#[test]
fn cg_terminates_in_fewer_iterations_than_unknowns() {
    let geometry = LevelSetGeometry::circle();
    let s = solve_level(
        &geometry,
        &benchmark_problem::<2>(Benchmark::Circle),
        6,
        GAMMA,
        0.0375,
        ElementOrder::Linear,
        1e-12,
    )
    .map_err(|e| e.1)
    .unwrap();
    assert!(s.report.converged);
    assert!(s.report.iterations < s.dofs.n_dofs(), "{:?}", s.report);
}

#[test]
fn jacobi_preconditioning_does_not_change_the_solution() {
    let geometry = LevelSetGeometry::circle();
    let s = solve_level(
        &geometry,
        &benchmark_problem::<2>(Benchmark::Circle),
        2,
        GAMMA,
        0.0375,
        ElementOrder::Linear,
        1e-12,
    )
    .map_err(|e| e.1)
    .unwrap();
    let plain = CgOptions {
        preconditioner: Preconditioner::None,
        ..CgOptions::default()
    };
    let (u, report) = solve_cg(&s.system.matrix, &s.system.rhs, &plain).unwrap();
    assert!(report.is_acceptable(), "{report:?}");
    let diff = u
        .iter()
        .zip(&s.u_h)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff < 1e-8, "max difference {diff:e}");
}

/// Spherical Bessel functions `j_0..=j_n` at `x` by Miller's downward recurrence.
fn spherical_bessel(n: usize, x: f64) -> Vec<f64> {
    let start = n + 40;
    let mut j = vec![0.0; start + 2];
    j[start + 1] = 0.0;
    j[start] = 1e-300;
    for l in (1..=start).rev() {
        j[l - 1] = (2 * l + 1) as f64 / x * j[l] - j[l + 1];
    }
    let scale = (x.sin() / x) / j[0];
    j.truncate(n + 1);
    j.iter().map(|v| v * scale).collect()
}

fn legendre(n: usize, t: f64) -> Vec<f64> {
    let mut p = vec![1.0, t];
    for l in 1..n {
        p.push(((2 * l + 1) as f64 * t * p[l] - l as f64 * p[l - 1]) / (l + 1) as f64);
    }
    p.truncate(n + 1);
    p
}

/// Exact solution of `-Δ_Γ u + u = A sin(k·x + c)` on the unit sphere.
///
/// The plane wave `e^{i κ t}`, `t = k̂·x`, expands as `Σ (2l+1) iˡ j_l(κ) P_l(t)`
/// and `P_l(k̂·x)` is an eigenfunction of `-Δ_Γ` with eigenvalue `l(l+1)`.
fn plane_wave_solution(amplitude: f64, kappa: f64, phase: f64, t: f64) -> f64 {
    let n = 60;
    let j = spherical_bessel(n, kappa);
    let p = legendre(n, t);
    // accumulate Im(e^{i phase} Σ ...) using iˡ = cos(lπ/2) + i sin(lπ/2)
    let mut im = 0.0;
    for l in 0..=n {
        let c = (2 * l + 1) as f64 * j[l] * p[l] / (l * (l + 1) + 1) as f64;
        im += c * (phase + l as f64 * PI / 2.0).sin();
    }
    amplitude * im
}

#[test]
fn bessel_and_legendre_oracles() {
    let j = spherical_bessel(2, 1.3);
    let x: f64 = 1.3;
    assert!((j[1] - (x.sin() / (x * x) - x.cos() / x)).abs() < 1e-14);
    assert!((j[2] - ((3.0 / (x * x) - 1.0) * x.sin() / x - 3.0 * x.cos() / (x * x))).abs() < 1e-14);
    // the undivided series reproduces the plane wave itself
    let (kappa, t) = (5.0 * 3f64.sqrt(), 0.3);
    let jn = spherical_bessel(60, kappa);
    let p = legendre(60, t);
    let series: f64 = (0..=60)
        .map(|l| (2 * l + 1) as f64 * jn[l] * p[l] * (2.5 + l as f64 * PI / 2.0).sin())
        .sum();
    assert!((series - (kappa * t + 2.5).sin()).abs() < 1e-12);
}

#[test]
fn oscillatory_source_on_the_sphere_matches_legendre_series() {
    let kappa = 5.0 * 3f64.sqrt();
    let problem =
        SurfaceProblem::new(|x: &[f64; 3]| 10000.0 * (5.0 * (x[0] + x[1] + x[2]) + 2.5).sin());
    let geometry = LevelSetGeometry::sphere();
    let s = solve_level(
        &geometry,
        &problem,
        1,
        GAMMA,
        0.0375,
        ElementOrder::Linear,
        1e-10,
    )
    .map_err(|e| e.1)
    .unwrap();
    let khat = [1.0 / 3f64.sqrt(); 3];
    let (mut worst, mut peak) = (0.0f64, 0.0f64);
    for i in 0..40 {
        for k in 0..40 {
            let (theta, lon) = (PI * (i as f64 + 0.5) / 40.0, 2.0 * PI * k as f64 / 40.0);
            let x = [
                theta.sin() * lon.cos(),
                theta.sin() * lon.sin(),
                theta.cos(),
            ];
            let t = x.iter().zip(&khat).map(|(a, b)| a * b).sum();
            let exact = plane_wave_solution(10000.0, kappa, 2.5, t);
            let (uh, _) = evaluate_at(&s.mesh, &s.dofs, &s.u_h, &x).unwrap();
            worst = worst.max((uh - exact).abs());
            peak = peak.max(exact.abs());
        }
    }
    assert!(peak > 800.0);
    assert!(worst < 0.02 * peak, "max error {worst} against peak {peak}");
}

#[test]
fn gradient_error_is_u_shaped_in_gamma() {
    let e2: Vec<f64> = [8.0 / 3.0, 16.0 / 3.0, 32.0 / 3.0]
        .iter()
        .map(|&gamma| {
            let config = StudyConfig {
                benchmark: Benchmark::Circle,
                degree: 6,
                gamma,
                levels: 1,
                h0: 0.01875,
                element_order: ElementOrder::Linear,
                cg_tol: 1e-12,
                surface_samples: 200,
            };
            run_convergence_study(&config).unwrap().rows[0].errors[1]
        })
        .collect();
    assert!(e2[1] < e2[0] && e2[1] < e2[2], "{e2:?}");
}

#[test]
fn error_functionals_of_exact_and_shifted_interpolants() {
    let geometry = LevelSetGeometry::circle();
    let grid = BackgroundGrid::with_cells(geometry.domain(), 32).unwrap();
    let profile = PhaseFieldProfile::new(2, grid.h(), GAMMA).unwrap();
    let rule = rule_for(2, 2).unwrap();
    let mesh = build_band_mesh(&grid, &geometry, &profile, &rule).unwrap();
    let dofs = DofMap::p1(&mesh);
    let problem = benchmark_problem::<2>(Benchmark::Circle);
    let exact = dofs.interpolate(phasefield::analysis::benchmark_solution);
    let (e1, e2) = error_e1_e2(&mesh, &dofs, &rule, &profile, &geometry, &exact, &problem).unwrap();
    // closest point and interpolant agree up to rounding at the nodes
    assert!(e1 < 1e-28 && e2 < 1e-26, "{e1:e} {e2:e}");

    let delta = 0.01;
    let shifted: Vec<f64> = exact.iter().map(|u| u - delta).collect();
    let (e1, e2) =
        error_e1_e2(&mesh, &dofs, &rule, &profile, &geometry, &shifted, &problem).unwrap();
    let ones = vec![1.0; dofs.n_dofs()];
    let (mass, _) = weighted_squares(&mesh, &dofs, &rule, &profile, &geometry, &ones).unwrap();
    assert!((e1 - delta * delta * mass).abs() < 1e-12 * e1);
    assert!(e2 < 1e-24);
}

#[test]
fn surface_errors_of_a_constant_offset() {
    let delta = 0.1;
    // exact solution 0 and u_h = δ everywhere
    let zero2 = SurfaceProblem::<2>::new(|_| 0.0).with_exact_solution(|_| 0.0, |_| [0.0; 2]);
    let circle = LevelSetGeometry::circle();
    let rule = rule_for(2, 1).unwrap();
    let grid = BackgroundGrid::with_cells(circle.domain(), 32).unwrap();
    let profile = PhaseFieldProfile::new(1, grid.h(), GAMMA).unwrap();
    let mesh = build_band_mesh(&grid, &circle, &profile, &rule).unwrap();
    let dofs = DofMap::p1(&mesh);
    let u_h = vec![delta; dofs.n_dofs()];
    let (e3, e4) = error_e3_e4_circle(&mesh, &dofs, &circle, &u_h, &zero2, 200).unwrap();
    assert!((e3 - 2.0 * PI * delta * delta).abs() < 1e-14);
    assert!(e4 < 1e-26);

    let zero3 = SurfaceProblem::<3>::new(|_| 0.0).with_exact_solution(|_| 0.0, |_| [0.0; 3]);
    let sphere = LevelSetGeometry::sphere();
    let rule = rule_for(3, 1).unwrap();
    let grid = BackgroundGrid::with_cells(sphere.domain(), 24).unwrap();
    let profile = PhaseFieldProfile::new(1, grid.h(), GAMMA).unwrap();
    let mesh = build_band_mesh(&grid, &sphere, &profile, &rule).unwrap();
    let dofs = DofMap::p1(&mesh);
    let u_h = vec![delta; dofs.n_dofs()];
    let area = |l| {
        error_e3_e4_sphere(&mesh, &dofs, &sphere, &u_h, &zero3, l)
            .unwrap()
            .0
            / (delta * delta)
    };
    let (err200, err400) = ((area(200) - 4.0 * PI).abs(), (area(400) - 4.0 * PI).abs());
    assert!(err200 < 1e-3);
    assert!((err200 / err400 - 4.0).abs() < 0.2, "{err200:e} {err400:e}");
}

#[test]
fn assembly_reports_nodes_without_a_closest_point() {
    // on a 16-cell grid the band is wide enough to contain the centre of the circle
    let geometry = LevelSetGeometry::<2>::circle();
    let grid = BackgroundGrid::with_cells(geometry.domain(), 16).unwrap();
    let profile = PhaseFieldProfile::new(1, grid.h(), GAMMA).unwrap();
    let rule = rule_for(2, 1).unwrap();
    let mesh = build_band_mesh(&grid, &geometry, &profile, &rule).unwrap();
    let dofs = DofMap::p1(&mesh);
    let problem = SurfaceProblem::new(|_| 1.0);
    match assemble(&mesh, &dofs, &rule, &profile, &geometry, &problem) {
        Err(phasefield::Error::DataExtension { node, .. }) => {
            let x = dofs.nodes()[node];
            assert!(x.iter().map(|v| v * v).sum::<f64>() < 1e-20, "{x:?}");
        }
        other => panic!(
            "expected a data extension failure, got {:?}",
            other.map(|_| ())
        ),
    }
}
