//! The phase-field weighted forms and the discrete band norm.
//!
//! For P1,
//!
//! ```text
//! a_h(v, w) = ε⁻¹ Σ_T Q_T[ρ (I_h Â ∇v·∇w + I_h â₀ v w)] |∇I_h φ|_T
//! l_h(v)    = ε⁻¹ Σ_T Q_T[ρ I_h f̂ v] |∇I_h φ|_T
//! ```
//!
//! where hats denote closest-point extensions `g(p̂(x))` of surface data. The
//! P2 variant fixes `A = I`, `a₀ = 1` and evaluates `|∇I_h φ|` of the quadratic
//! interpolant inside the quadrature sum.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::element::{ElementOrder, TabulatedBasis};
use crate::geometry::{LevelSetGeometry, PhaseFieldProfile};
use crate::mesh::{DofMap, SimplicialBandMesh};
use crate::quadrature::QuadratureRule;
use crate::simplex::{dot, norm};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

pub type ScalarField<const D: usize> = Arc<dyn Fn(&[f64; D]) -> f64 + Send + Sync>;
pub type VectorField<const D: usize> = Arc<dyn Fn(&[f64; D]) -> [f64; D] + Send + Sync>;
pub type MatrixField<const D: usize> = Arc<dyn Fn(&[f64; D]) -> [[f64; D]; D] + Send + Sync>;

/// Elements processed per parallel batch; batches are merged in order.
const ELEMENT_CHUNK: usize = 8192;

/// Data of `-div_Γ(A ∇_Γ u) + a₀ u = f` on `Γ`.
///
/// All fields are evaluated on `Γ` only (at closest points). A missing
/// diffusion means `A = I`; a missing reaction means `a₀ = 1`.
#[derive(Clone)]
pub struct SurfaceProblem<const D: usize> {
    diffusion: Option<MatrixField<D>>,
    reaction: Option<ScalarField<D>>,
    source: ScalarField<D>,
    exact_solution: Option<ScalarField<D>>,
    exact_surface_gradient: Option<VectorField<D>>,
}

impl<const D: usize> fmt::Debug for SurfaceProblem<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceProblem")
            .field("variable_diffusion", &self.diffusion.is_some())
            .field("variable_reaction", &self.reaction.is_some())
            .field("has_exact_solution", &self.exact_solution.is_some())
            .finish()
    }
}

impl<const D: usize> SurfaceProblem<D> {
    /// `-Δ_Γ u + u = f`.
    pub fn new(source: impl Fn(&[f64; D]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            diffusion: None,
            reaction: None,
            source: Arc::new(source),
            exact_solution: None,
            exact_surface_gradient: None,
        }
    }

    pub fn with_diffusion(
        mut self,
        a: impl Fn(&[f64; D]) -> [[f64; D]; D] + Send + Sync + 'static,
    ) -> Self {
        self.diffusion = Some(Arc::new(a));
        self
    }

    pub fn with_reaction(mut self, a0: impl Fn(&[f64; D]) -> f64 + Send + Sync + 'static) -> Self {
        self.reaction = Some(Arc::new(a0));
        self
    }

    pub fn with_exact_solution(
        mut self,
        u: impl Fn(&[f64; D]) -> f64 + Send + Sync + 'static,
        surface_gradient: impl Fn(&[f64; D]) -> [f64; D] + Send + Sync + 'static,
    ) -> Self {
        self.exact_solution = Some(Arc::new(u));
        self.exact_surface_gradient = Some(Arc::new(surface_gradient));
        self
    }

    pub fn has_unit_coefficients(&self) -> bool {
        self.diffusion.is_none() && self.reaction.is_none()
    }

    pub fn source(&self, p: &[f64; D]) -> f64 {
        (self.source)(p)
    }

    pub fn reaction(&self, p: &[f64; D]) -> f64 {
        self.reaction.as_ref().map_or(1.0, |a0| a0(p))
    }

    pub fn diffusion(&self, p: &[f64; D]) -> [[f64; D]; D] {
        match &self.diffusion {
            Some(a) => a(p),
            None => {
                let mut id = [[0.0; D]; D];
                for (k, row) in id.iter_mut().enumerate() {
                    row[k] = 1.0;
                }
                id
            }
        }
    }

    pub fn exact_solution(&self) -> Option<&ScalarField<D>> {
        self.exact_solution.as_ref()
    }

    pub fn exact_surface_gradient(&self) -> Option<&VectorField<D>> {
        self.exact_surface_gradient.as_ref()
    }

    /// Check symmetry, tangential ellipticity and positivity of `a₀` at sample
    /// points of `Γ` with unit normals. Returns the observed `(α, α₀)`.
    pub fn validate(&self, samples: &[([f64; D], [f64; D])]) -> Result<(f64, f64)> {
        let mut alpha = f64::INFINITY;
        let mut alpha0 = f64::INFINITY;
        for (p, nu) in samples {
            let a = self.diffusion(p);
            for r in 0..D {
                for c in r + 1..D {
                    if (a[r][c] - a[c][r]).abs() > 1e-12 * (1.0 + a[r][c].abs()) {
                        return Err(Error::InvalidInput(format!(
                            "diffusion is not symmetric at {p:?}"
                        )));
                    }
                }
            }
            // tangent basis: project the coordinate axes and keep the best-conditioned ones
            for k in 0..D {
                let mut xi = [0.0; D];
                xi[k] = 1.0;
                let along = dot(&xi, nu);
                for d in 0..D {
                    xi[d] -= along * nu[d];
                }
                let len = norm(&xi);
                if len < 1e-3 {
                    continue;
                }
                let mut axi = [0.0; D];
                for r in 0..D {
                    for c in 0..D {
                        axi[r] += a[r][c] * xi[c];
                    }
                }
                alpha = alpha.min(dot(&xi, &axi) / (len * len));
            }
            alpha0 = alpha0.min(self.reaction(p));
        }
        if !(alpha > 0.0) || !(alpha0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "coefficients are not elliptic (alpha = {alpha}, alpha0 = {alpha0})"
            )));
        }
        Ok((alpha, alpha0))
    }
}

/// The linear system of the discrete problem.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub element_order: ElementOrder,
}

impl AssembledSystem {
    /// `A u - b`: the Galerkin residual against every basis function.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let mut r = self.matrix.mul_vec(u);
        for (ri, bi) in r.iter_mut().zip(&self.rhs) {
            *ri -= bi;
        }
        r
    }
}

/// Surface data pulled back to the nodes through `p̂`.
struct NodalData<const D: usize> {
    phi: Vec<f64>,
    source: Vec<f64>,
    reaction: Option<Vec<f64>>,
    diffusion: Option<Vec<[[f64; D]; D]>>,
}

fn extend_data<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    dofs: &DofMap<D>,
    geometry: &LevelSetGeometry<D>,
    problem: &SurfaceProblem<D>,
) -> Result<NodalData<D>> {
    let projected: Vec<Result<[f64; D]>> = dofs
        .nodes()
        .par_iter()
        .map(|x| geometry.closest_point(x))
        .collect();
    let mut closest = Vec::with_capacity(projected.len());
    for (node, p) in projected.into_iter().enumerate() {
        closest.push(p.map_err(|e| Error::DataExtension {
            node,
            source: Box::new(e),
        })?);
    }
    let phi = match dofs.order() {
        ElementOrder::Linear => mesh.phi_at_vertices().to_vec(),
        ElementOrder::Quadratic => dofs.nodes().par_iter().map(|x| geometry.phi(x)).collect(),
    };
    Ok(NodalData {
        phi,
        source: closest.par_iter().map(|p| problem.source(p)).collect(),
        reaction: problem
            .reaction
            .as_ref()
            .map(|a0| closest.par_iter().map(|p| a0(p)).collect()),
        diffusion: problem
            .diffusion
            .as_ref()
            .map(|a| closest.par_iter().map(|p| a(p)).collect()),
    })
}

/// Weighted forms for P1 elements.
pub fn assemble_p1<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    dofs: &DofMap<D>,
    rule: &QuadratureRule,
    profile: &PhaseFieldProfile,
    geometry: &LevelSetGeometry<D>,
    problem: &SurfaceProblem<D>,
) -> Result<AssembledSystem> {
    if dofs.order() != ElementOrder::Linear {
        return Err(Error::InvalidInput("assemble_p1 needs a P1 DOF map".into()));
    }
    assemble_weighted(mesh, dofs, rule, profile, geometry, problem)
}

/// Weighted forms for P2 elements (`A = I`, `a₀ = 1` only).
pub fn assemble_p2<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    dofs: &DofMap<D>,
    rule: &QuadratureRule,
    profile: &PhaseFieldProfile,
    geometry: &LevelSetGeometry<D>,
    problem: &SurfaceProblem<D>,
) -> Result<AssembledSystem> {
    if dofs.order() != ElementOrder::Quadratic {
        return Err(Error::InvalidInput("assemble_p2 needs a P2 DOF map".into()));
    }
    if !problem.has_unit_coefficients() {
        return Err(Error::Unsupported(
            "quadratic elements are only defined for A = I and a0 = 1".into(),
        ));
    }
    assemble_weighted(mesh, dofs, rule, profile, geometry, problem)
}

/// Dispatch on the DOF map's element order.
pub fn assemble<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    dofs: &DofMap<D>,
    rule: &QuadratureRule,
    profile: &PhaseFieldProfile,
    geometry: &LevelSetGeometry<D>,
    problem: &SurfaceProblem<D>,
) -> Result<AssembledSystem> {
    match dofs.order() {
        ElementOrder::Linear => assemble_p1(mesh, dofs, rule, profile, geometry, problem),
        ElementOrder::Quadratic => assemble_p2(mesh, dofs, rule, profile, geometry, problem),
    }
}

fn check_compatible<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    rule: &QuadratureRule,
    profile: &PhaseFieldProfile,
) -> Result<()> {
    if rule.dimension() != D {
        return Err(Error::DimensionMismatch {
            expected: D,
            found: rule.dimension(),
        });
    }
    if rule.degree() != profile.degree() {
        return Err(Error::InvalidInput(format!(
            "rule degree {} differs from profile degree {}",
            rule.degree(),
            profile.degree()
        )));
    }
    if (mesh.band().epsilon - profile.epsilon()).abs() > 1e-14 * profile.epsilon() {
        return Err(Error::InvalidInput(
            "mesh was built for a different epsilon".into(),
        ));
    }
    Ok(())
}

fn assemble_weighted<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    dofs: &DofMap<D>,
    rule: &QuadratureRule,
    profile: &PhaseFieldProfile,
    geometry: &LevelSetGeometry<D>,
    problem: &SurfaceProblem<D>,
) -> Result<AssembledSystem> {
    check_compatible(mesh, rule, profile)?;
    let data = extend_data(mesh, dofs, geometry, problem)?;
    let basis = TabulatedBasis::new(dofs.order(), D, rule.points());
    let n_local = dofs.n_local();
    let n_elements = mesh.n_simplices();
    let inv_eps = 1.0 / profile.epsilon();
    let linear = dofs.order() == ElementOrder::Linear;

    let local = |t: usize, kloc: &mut [f64], floc: &mut [f64]| {
        kloc.iter_mut().for_each(|v| *v = 0.0);
        floc.iter_mut().for_each(|v| *v = 0.0);
        let geo = mesh.element_geometry(t);
        let edofs = dofs.element_dofs(t);
        let mut grads = [[0.0; D]; 10];
        let grads = &mut grads[..n_local];
        for (p, (b, w)) in rule.iter().enumerate() {
            let x = geo.point(b);
            let rho = profile.rho_of_level(geometry.phi(&x));
            let values = basis.values(p);
            basis.gradients(p, geo.grad_lambda(), grads);
            let grad_phi = if linear {
                mesh.grad_interp_phi(t)
            } else {
                let mut g = [0.0; D];
                for (k, gk) in grads.iter().enumerate() {
                    for d in 0..D {
                        g[d] += data.phi[edofs[k]] * gk[d];
                    }
                }
                norm(&g)
            };
            let scale = w * geo.volume * rho * grad_phi * inv_eps;
            let interp = |nodal: &[f64]| -> f64 {
                values.iter().zip(edofs).map(|(n, &d)| n * nodal[d]).sum()
            };
            let f_q = interp(&data.source);
            let a0_q = data.reaction.as_deref().map_or(1.0, interp);
            let a_q = data.diffusion.as_ref().map(|a| {
                let mut m = [[0.0; D]; D];
                for (n, &d) in values.iter().zip(edofs) {
                    for r in 0..D {
                        for c in 0..D {
                            m[r][c] += n * a[d][r][c];
                        }
                    }
                }
                m
            });
            for i in 0..n_local {
                floc[i] += scale * f_q * values[i];
                let a_grad_i = match &a_q {
                    Some(m) => {
                        let mut v = [0.0; D];
                        for r in 0..D {
                            for c in 0..D {
                                v[r] += m[r][c] * grads[i][c];
                            }
                        }
                        v
                    }
                    None => grads[i],
                };
                for j in i..n_local {
                    kloc[i * n_local + j] +=
                        scale * (dot(&a_grad_i, &grads[j]) + a0_q * values[i] * values[j]);
                }
            }
        }
        for i in 0..n_local {
            for j in 0..i {
                kloc[i * n_local + j] = kloc[j * n_local + i];
            }
        }
    };

    let mut matrix =
        CsrMatrix::from_element_dofs(dofs.n_dofs(), (0..n_elements).map(|t| dofs.element_dofs(t)));
    let mut rhs = vec![0.0; dofs.n_dofs()];
    let stride = n_local * n_local + n_local;
    for start in (0..n_elements).step_by(ELEMENT_CHUNK) {
        let end = (start + ELEMENT_CHUNK).min(n_elements);
        let mut buffer = vec![0.0; (end - start) * stride];
        buffer
            .par_chunks_mut(stride)
            .enumerate()
            .for_each(|(i, chunk)| {
                let (kloc, floc) = chunk.split_at_mut(n_local * n_local);
                local(start + i, kloc, floc);
            });
        for (i, chunk) in buffer.chunks_exact(stride).enumerate() {
            let edofs = dofs.element_dofs(start + i);
            let (kloc, floc) = chunk.split_at(n_local * n_local);
            for (a, &r) in edofs.iter().enumerate() {
                rhs[r] += floc[a];
                for (b, &c) in edofs.iter().enumerate() {
                    matrix.add(r, c, kloc[a * n_local + b]);
                }
            }
        }
    }
    Ok(AssembledSystem {
        matrix,
        rhs,
        element_order: dofs.order(),
    })
}

/// `(ε⁻¹ Σ_T Q_T[ρ |v|²], ε⁻¹ Σ_T Q_T[ρ |∇v|²])` for a finite element function `v`.
pub fn weighted_squares<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    dofs: &DofMap<D>,
    rule: &QuadratureRule,
    profile: &PhaseFieldProfile,
    geometry: &LevelSetGeometry<D>,
    coefficients: &[f64],
) -> Result<(f64, f64)> {
    if coefficients.len() != dofs.n_dofs() {
        return Err(Error::DimensionMismatch {
            expected: dofs.n_dofs(),
            found: coefficients.len(),
        });
    }
    let basis = TabulatedBasis::new(dofs.order(), D, rule.points());
    let n_local = dofs.n_local();
    let n_elements = mesh.n_simplices();
    let partial: Vec<(f64, f64)> = (0..n_elements.div_ceil(ELEMENT_CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut grads = [[0.0; D]; 10];
            let grads = &mut grads[..n_local];
            let (mut mass, mut stiff) = (0.0, 0.0);
            for t in chunk * ELEMENT_CHUNK..((chunk + 1) * ELEMENT_CHUNK).min(n_elements) {
                let geo = mesh.element_geometry(t);
                let edofs = dofs.element_dofs(t);
                for (p, (b, w)) in rule.iter().enumerate() {
                    let rho = profile.rho_of_level(geometry.phi(&geo.point(b)));
                    basis.gradients(p, geo.grad_lambda(), grads);
                    let mut v = 0.0;
                    let mut g = [0.0; D];
                    for (k, (&n, &d)) in basis.values(p).iter().zip(edofs).enumerate() {
                        v += n * coefficients[d];
                        for c in 0..D {
                            g[c] += coefficients[d] * grads[k][c];
                        }
                    }
                    let scale = w * geo.volume * rho;
                    mass += scale * v * v;
                    stiff += scale * dot(&g, &g);
                }
            }
            (mass, stiff)
        })
        .collect();
    let inv_eps = 1.0 / profile.epsilon();
    let mass: f64 = partial.iter().map(|p| p.0).sum();
    let stiff: f64 = partial.iter().map(|p| p.1).sum();
    Ok((mass * inv_eps, stiff * inv_eps))
}

/// `‖v‖_h = (ε⁻¹ Σ_T Q_T[ρ (|v|² + |∇v|²)])^{1/2}`.
pub fn discrete_norm_h<const D: usize>(
    mesh: &SimplicialBandMesh<D>,
    dofs: &DofMap<D>,
    rule: &QuadratureRule,
    profile: &PhaseFieldProfile,
    geometry: &LevelSetGeometry<D>,
    coefficients: &[f64],
) -> Result<f64> {
    let (mass, stiff) = weighted_squares(mesh, dofs, rule, profile, geometry, coefficients)?;
    Ok((mass + stiff).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_band_mesh, BackgroundGrid};
    use crate::quadrature::rule_for;
    use crate::solver::{solve_cg, CgOptions};

    struct Setup {
        mesh: SimplicialBandMesh<2>,
        rule: QuadratureRule,
        profile: PhaseFieldProfile,
        geometry: LevelSetGeometry<2>,
    }

    fn circle(q: usize, cells: usize, gamma: f64) -> Setup {
        let geometry = LevelSetGeometry::circle();
        let grid = BackgroundGrid::with_cells(geometry.domain(), cells).unwrap();
        let profile = PhaseFieldProfile::new(q, grid.h(), gamma).unwrap();
        let rule = rule_for(2, q).unwrap();
        let mesh = build_band_mesh(&grid, &geometry, &profile, &rule).unwrap();
        Setup {
            mesh,
            rule,
            profile,
            geometry,
        }
    }

    #[test]
    fn constant_data_gives_constant_solution() {
        let s = circle(2, 64, 16.0 / 3.0);
        let problem = SurfaceProblem::new(|_| 1.0);
        for dofs in [DofMap::p1(&s.mesh), DofMap::p2(&s.mesh)] {
            let sys = assemble(&s.mesh, &dofs, &s.rule, &s.profile, &s.geometry, &problem).unwrap();
            let ones = vec![1.0; dofs.n_dofs()];
            let r = sys.residual(&ones);
            // relative to the row magnitude: cancellation in Σ_j A_ij is the only error source
            let worst = (0..dofs.n_dofs())
                .map(|i| r[i].abs() / sys.matrix.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0f64, f64::max);
            assert!(worst < 1e-13, "{} residual {worst:e}", dofs.order());
            let (u, _) = solve_cg(&sys.matrix, &sys.rhs, &CgOptions::default()).unwrap();
            assert!(u.iter().all(|v| (v - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn matrix_is_symmetric_and_positive() {
        let s = circle(6, 32, 16.0 / 3.0);
        let problem = SurfaceProblem::new(|p: &[f64; 2]| p[0]);
        for dofs in [DofMap::p1(&s.mesh), DofMap::p2(&s.mesh)] {
            let sys = assemble(&s.mesh, &dofs, &s.rule, &s.profile, &s.geometry, &problem).unwrap();
            assert!(sys.matrix.is_symmetric());
            for seed in 0..5u64 {
                let v: Vec<f64> = (0..dofs.n_dofs())
                    .map(|i| {
                        (((i as u64 + 1) * (seed + 7) * 2654435761) % 1000) as f64 / 500.0 - 1.0
                    })
                    .collect();
                assert!(sys.matrix.bilinear(&v, &v) > 0.0);
            }
        }
    }

    #[test]
    fn explicit_identity_coefficients_match_defaults() {
        let s = circle(2, 32, 16.0 / 3.0);
        let dofs = DofMap::p1(&s.mesh);
        let plain = SurfaceProblem::new(|p: &[f64; 2]| p[1]);
        let explicit = SurfaceProblem::new(|p: &[f64; 2]| p[1])
            .with_diffusion(|_| [[1.0, 0.0], [0.0, 1.0]])
            .with_reaction(|_| 1.0);
        let a = assemble(&s.mesh, &dofs, &s.rule, &s.profile, &s.geometry, &plain).unwrap();
        let b = assemble(&s.mesh, &dofs, &s.rule, &s.profile, &s.geometry, &explicit).unwrap();
        for r in 0..dofs.n_dofs() {
            let (cols, va) = a.matrix.row(r);
            for (&c, &x) in cols.iter().zip(va) {
                assert!((x - b.matrix.get(r, c)).abs() <= 1e-14 * x.abs().max(1.0));
            }
        }
        assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn quadratic_elements_reject_variable_coefficients() {
        let s = circle(2, 32, 16.0 / 3.0);
        let dofs = DofMap::p2(&s.mesh);
        let problem = SurfaceProblem::new(|_| 1.0).with_reaction(|_| 2.0);
        assert!(matches!(
            assemble_p2(&s.mesh, &dofs, &s.rule, &s.profile, &s.geometry, &problem),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn norm_of_one_matches_coarea_oracle() {
        // ε⁻¹∫ρ dx in polar coordinates, integrated by composite Simpson.
        let (q, eps) = (1, 0.2);
        let s = circle(q, 64, eps / 0.0375);
        let n = 20_000;
        let (a, b) = (
            (1.0 - eps * std::f64::consts::FRAC_PI_2).sqrt(),
            (1.0 + eps * std::f64::consts::FRAC_PI_2).sqrt(),
        );
        let dr = (b - a) / n as f64;
        let g = |r: f64| {
            2.0 * std::f64::consts::PI * r * crate::geometry::sigma(q, (r * r - 1.0) / eps)
        };
        let mut oracle = g(a) + g(b);
        for k in 1..n {
            oracle += if k % 2 == 1 { 4.0 } else { 2.0 } * g(a + k as f64 * dr);
        }
        oracle *= dr / 3.0 / eps;
        let dofs = DofMap::p1(&s.mesh);
        let ones = vec![1.0; dofs.n_dofs()];
        let norm2 = discrete_norm_h(&s.mesh, &dofs, &s.rule, &s.profile, &s.geometry, &ones)
            .unwrap()
            .powi(2);
        assert!((norm2 / oracle - 1.0).abs() < 0.05, "{norm2} vs {oracle}");
    }

    #[test]
    fn validate_detects_non_elliptic_data() {
        let samples = [([1.0, 0.0], [1.0, 0.0]), ([0.0, 1.0], [0.0, 1.0])];
        assert!(SurfaceProblem::<2>::new(|_| 0.0).validate(&samples).is_ok());
        let bad = SurfaceProblem::<2>::new(|_| 0.0).with_reaction(|_| -1.0);
        assert!(bad.validate(&samples).is_err());
        let skew = SurfaceProblem::<2>::new(|_| 0.0).with_diffusion(|_| [[1.0, 0.5], [0.0, 1.0]]);
        assert!(skew.validate(&samples).is_err());
    }
}
