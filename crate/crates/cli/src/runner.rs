//! Executes a [`RunConfig`]: convergence studies for the benchmarks, and a
//! single solve plus isosurface export for the pretzel.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use phasefield::analysis::{
    run_convergence_study, solve_level, Benchmark, ConvergenceTable, StudyConfig,
};
use phasefield::assembly::SurfaceProblem;
use phasefield::geometry::LevelSetGeometry;

use crate::config::{Example, RunConfig};
use crate::isosurface::{extract_zero_isosurface, TriangleSurface};
use crate::table::write_csv;
use crate::vtk::write_vtk;

/// What a run produced, for reporting.
#[derive(Debug)]
pub enum RunOutcome {
    Study {
        table: ConvergenceTable,
        csv: String,
        csv_path: Option<PathBuf>,
    },
    Surface {
        surface: TriangleSurface,
        /// `(min, max)` over all DOFs of `u_h`.
        dof_range: (f64, f64),
        vtk_path: Option<PathBuf>,
        cg_iterations: usize,
    },
}

/// `f(x) = 10000 sin(5(x₁ + x₂ + x₃) + 2.5)`.
pub fn pretzel_problem() -> SurfaceProblem<3> {
    SurfaceProblem::new(|x: &[f64; 3]| 10000.0 * (5.0 * (x[0] + x[1] + x[2]) + 2.5).sin())
}

/// Messages about admissibility that do not stop the run.
pub fn warnings(config: &RunConfig) -> Vec<String> {
    let min_gamma = match config.example {
        Example::Circle => LevelSetGeometry::circle().min_gamma(),
        Example::Sphere => LevelSetGeometry::sphere().min_gamma(),
        Example::Pretzel => LevelSetGeometry::pretzel().min_gamma(),
    };
    let gamma = config.gamma();
    if gamma > min_gamma {
        Vec::new()
    } else {
        vec![format!(
            "gamma = {gamma:.4} does not exceed 1/r0 = {min_gamma:.4} for the {} gradient bound; \
             the band may not contain the full support of rho",
            config.example
        )]
    }
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    let resolve = |p: &PathBuf| {
        if p.is_absolute() {
            p.clone()
        } else {
            out_dir.join(p)
        }
    };
    match config.example {
        Example::Circle | Example::Sphere => {
            if config.vtk.is_some() {
                bail!("vtk output is only produced for the pretzel example");
            }
            let study = StudyConfig {
                benchmark: if config.example == Example::Circle {
                    Benchmark::Circle
                } else {
                    Benchmark::Sphere
                },
                degree: config.q,
                gamma: config.gamma(),
                levels: config.levels,
                h0: config.h0,
                element_order: config.element_order,
                cg_tol: config.cg_tol,
                surface_samples: config.surface_samples,
            };
            let table = run_convergence_study(&study)
                .with_context(|| format!("study `{}` failed", config.name))?;
            let csv = write_csv(&table);
            let csv_path = config.csv.as_ref().map(resolve);
            if let Some(path) = &csv_path {
                fs::write(path, &csv)
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(RunOutcome::Study {
                table,
                csv,
                csv_path,
            })
        }
        Example::Pretzel => {
            if config.levels != 1 {
                bail!("the pretzel example has no exact solution; use levels = 1");
            }
            if config.csv.is_some() {
                bail!("the pretzel example has no exact solution, so no csv can be written");
            }
            let geometry = LevelSetGeometry::pretzel();
            let solution = solve_level(
                &geometry,
                &pretzel_problem(),
                config.q,
                config.gamma(),
                config.h0,
                config.element_order,
                config.cg_tol,
            )
            .map_err(|(stage, e)| {
                anyhow::Error::new(e).context(format!("level 0 ({stage}) failed"))
            })?;
            let surface = extract_zero_isosurface(&solution.mesh, &solution.u_h);
            let dof_range = solution
                .u_h
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            let vtk_path = config.vtk.as_ref().map(resolve);
            if let Some(path) = &vtk_path {
                let title = format!("{}: u_h on the zero level set of I_h phi", config.name);
                fs::write(path, write_vtk(&surface, &title))
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(RunOutcome::Surface {
                surface,
                dof_range,
                vtk_path,
                cg_iterations: solution.report.iterations,
            })
        }
    }
}
