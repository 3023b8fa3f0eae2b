use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no tabulated quadrature rule of degree {degree} in dimension {dimension}")]
    NoQuadratureRule { dimension: usize, degree: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate simplex (volume {volume:e})")]
    DegenerateSimplex { volume: f64 },

    #[error(
        "closest-point projection of {point:?} did not converge after {iterations} iterations \
         (|phi| = {level_residual:e}, tangential residual = {alignment_residual:e})"
    )]
    ProjectionFailed {
        point: Vec<f64>,
        iterations: usize,
        level_residual: f64,
        alignment_residual: f64,
    },

    #[error("data extension failed at node {node}: {source}")]
    DataExtension {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("band requires h < epsilon (h = {h}, epsilon = {epsilon})")]
    BandTooNarrow { h: f64, epsilon: f64 },

    #[error("no simplex satisfies the band criterion (h = {h}, epsilon = {epsilon})")]
    EmptyBand { h: f64, epsilon: f64 },

    #[error("point {point:?} lies outside the band mesh")]
    PointNotFound { point: Vec<f64> },

    #[error("surface sample {index} at {point:?} lies outside the band mesh")]
    SampleNotFound { index: usize, point: Vec<f64> },

    #[error("problem has no exact solution")]
    MissingExactSolution,

    #[error("unsupported problem: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("level {level} ({stage}): {source}")]
    Level {
        level: usize,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}
