//! Positive-weight quadrature rules on the reference simplex.
//!
//! Rules are stored in barycentric form with weights normalized to sum to one,
//! so that `Q_T(g) = |T| * sum_i w_i g(b_i)` for any simplex `T`.

use crate::simplex;
use crate::Error;

/// A symmetric quadrature rule on the reference simplex of `R^dimension`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    dimension: usize,
    degree: usize,
    /// Barycentric coordinates, `dimension + 1` entries per point.
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points
            .iter()
            .map(Vec::as_slice)
            .zip(self.weights.iter().copied())
    }

    /// Evaluate `sum_i w_i g(b_i)` on the reference simplex (without the `|T^|` factor).
    pub fn apply_barycentric<F: FnMut(&[f64]) -> f64>(&self, mut g: F) -> f64 {
        self.iter().map(|(b, w)| w * g(b)).sum()
    }
}

/// Positive rule of the requested exactness degree.
///
/// Available pairs: dimension 2 or 3 with degree 1, 2 or 6. Other degrees are
/// rejected rather than silently served by a lower-order rule.
pub fn rule_for(dimension: usize, degree: usize) -> Result<QuadratureRule, Error> {
    let orbits: &[(Orbit, f64)] = match (dimension, degree) {
        (2, 1) => &TRI_DEGREE_1,
        (2, 2) => &TRI_DEGREE_2,
        (2, 6) => &TRI_DEGREE_6,
        (3, 1) => &TET_DEGREE_1,
        (3, 2) => &TET_DEGREE_2,
        (3, 6) => &TET_DEGREE_6,
        _ => return Err(Error::NoQuadratureRule { dimension, degree }),
    };
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (orbit, weight) in orbits {
        for p in orbit.expand(dimension) {
            points.push(p);
            weights.push(*weight);
        }
    }
    Ok(QuadratureRule {
        dimension,
        degree,
        points,
        weights,
    })
}

/// Map a rule onto a physical simplex. Returns `(b_{i,T}, w_i |T|)` pairs.
pub fn map_to_element<const D: usize>(
    rule: &QuadratureRule,
    vertices: &[[f64; D]],
) -> Result<Vec<([f64; D], f64)>, Error> {
    if rule.dimension != D || vertices.len() != D + 1 {
        return Err(Error::DimensionMismatch {
            expected: rule.dimension,
            found: D,
        });
    }
    let volume = simplex::volume(vertices);
    if !(volume > simplex::DEGENERATE_VOLUME * simplex::scale(vertices).powi(D as i32)) {
        return Err(Error::DegenerateSimplex { volume });
    }
    Ok(rule
        .iter()
        .map(|(b, w)| (simplex::from_barycentric(vertices, b), w * volume))
        .collect())
}

/// Symmetry orbits of barycentric points. Entries are the free parameters;
/// the last coordinate is implied by the partition of unity.
#[derive(Clone, Copy, Debug)]
enum Orbit {
    Centroid,
    /// `(a, ..., a, 1 - n a)`: all distinct permutations.
    S1(f64),
    /// `(a, a, 1 - 2a)` in 2D or `(a, a, b, 1 - 2a - b)` in 3D.
    S2(f64, f64),
    /// `(a, b, 1 - a - b)` in 2D.
    S3(f64, f64),
    /// Midpoint of an edge: `(1/2, 1/2, 0, ...)`.
    Edge,
}

impl Orbit {
    fn expand(&self, dimension: usize) -> Vec<Vec<f64>> {
        let n = dimension + 1;
        let base: Vec<f64> = match *self {
            Orbit::Centroid => vec![1.0 / n as f64; n],
            Orbit::S1(a) => {
                let mut v = vec![a; n];
                v[n - 1] = 1.0 - (n - 1) as f64 * a;
                v
            }
            Orbit::S2(a, b) => {
                if n == 3 {
                    vec![a, a, 1.0 - 2.0 * a]
                } else {
                    vec![a, a, b, 1.0 - 2.0 * a - b]
                }
            }
            Orbit::S3(a, b) => vec![a, b, 1.0 - a - b],
            Orbit::Edge => {
                let mut v = vec![0.0; n];
                v[0] = 0.5;
                v[1] = 0.5;
                v
            }
        };
        distinct_permutations(&base)
    }
}

/// All distinct permutations in lexicographic order of index assignment.
fn distinct_permutations(base: &[f64]) -> Vec<Vec<f64>> {
    let n = base.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let candidate: Vec<f64> = idx.iter().map(|&i| base[i]).collect();
        if !out.iter().any(|p| p == &candidate) {
            out.push(candidate);
        }
        if !next_permutation(&mut idx) {
            break;
        }
    }
    out
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

const TRI_DEGREE_1: [(Orbit, f64); 1] = [(Orbit::Centroid, 1.0)];

const TRI_DEGREE_2: [(Orbit, f64); 1] = [(Orbit::Edge, 1.0 / 3.0)];

// Dunavant's 12-point rule.
const TRI_DEGREE_6: [(Orbit, f64); 3] = [
    (
        Orbit::S2(0.063_089_014_491_502_23, 0.0),
        0.050_844_906_370_206_82,
    ),
    (
        Orbit::S2(0.249_286_745_170_910_43, 0.0),
        0.116_786_275_726_379_37,
    ),
    (
        Orbit::S3(0.053_145_049_844_816_947, 0.310_352_451_033_784_4),
        0.082_851_075_618_373_57,
    ),
];

const TET_DEGREE_1: [(Orbit, f64); 1] = [(Orbit::Centroid, 1.0)];

const TET_DEGREE_2: [(Orbit, f64); 1] = [(Orbit::S1(0.138_196_601_125_010_5), 0.25)];

// Keast's 24-point rule.
const TET_DEGREE_6: [(Orbit, f64); 4] = [
    (
        Orbit::S1(0.214_602_871_259_152_03),
        0.039_922_750_258_167_492,
    ),
    (
        Orbit::S1(0.040_673_958_534_611_35),
        0.010_077_211_055_320_643,
    ),
    (
        Orbit::S1(0.322_337_890_142_275_5),
        0.055_357_181_543_654_722,
    ),
    (
        Orbit::S2(0.063_661_001_875_017_53, 0.603_005_664_791_649_2),
        0.048_214_285_714_285_714,
    ),
];
