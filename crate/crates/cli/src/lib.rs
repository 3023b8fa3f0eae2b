//! Config-driven experiment runner for the `phasefield` solver.
//!
//! A run is described by a flat `key = value` file (see [`config`]). Benchmark
//! runs on the circle and sphere produce a convergence table written as CSV;
//! the pretzel run solves one level and writes the solution on the extracted
//! zero isosurface of `I_h φ` as legacy VTK.

pub mod config;
pub mod isosurface;
pub mod runner;
pub mod selftest;
pub mod table;
pub mod vtk;
