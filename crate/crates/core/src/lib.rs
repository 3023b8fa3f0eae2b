//! Diffuse-interface finite elements for elliptic PDEs on closed hypersurfaces.
//!
//! A surface `Γ = {φ = 0}` is never meshed. Instead, a narrow band of simplices
//! of a uniform background grid is selected by evaluating `φ` at quadrature
//! points, and the surface PDE `-div_Γ(A ∇_Γ u) + a0 u = f` is discretized by
//! bulk finite elements weighted with the phase field `ρ = σ(φ/ε)`,
//! `σ(r) = cos^{2(q+1)}(r)`, where `q` is the exactness degree of the
//! quadrature rule.
//!
//! The crate is organized bottom-up:
//!
//! - [`quadrature`]: positive simplex rules of degree 1, 2 and 6
//! - [`geometry`]: level sets, closest-point projection, phase-field profile
//!   and band constants
//! - [`mesh`]: Kuhn-subdivided narrow-band meshes, point location, P1/P2 DOFs
//! - [`assembly`]: the weighted bilinear and linear forms and the discrete norm
//! - [`solver`]: Jacobi-preconditioned conjugate gradients on CSR matrices
//! - [`analysis`]: error functionals, EOCs and convergence studies

// `!(x > 0.0)` deliberately rejects NaN; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod assembly;
pub mod element;
mod error;
pub mod geometry;
pub mod mesh;
pub mod quadrature;
pub mod simplex;
pub mod solver;
pub mod sparse;

pub use error::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;
