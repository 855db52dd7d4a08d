use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid quadrature nodes: {0}")]
    InvalidNodes(String),

    #[error("Id + mu*A is singular for mu = {mu}")]
    DegenerateMu { mu: f64 },

    #[error("singular stage matrix: {0}")]
    SingularMatrix(String),

    #[error("unstable stencil (r = {r}, s = {s}): {reason}")]
    UnstableStencil { r: usize, s: usize, reason: String },

    #[error("coefficients are not consistent: sum = {sum:e}")]
    InconsistentCoefficients { sum: f64 },

    #[error("lattice speed must be positive, got {0}")]
    InvalidSpeed(f64),

    #[error("state outside the invariance domain at node {node}: {reason}")]
    OutOfDomain { node: usize, reason: String },

    #[error("singular amplification denominator at theta = {theta}")]
    SingularSymbol { theta: f64 },

    #[error("solution diverged at step {step}, DEC iteration {iteration}")]
    Diverged { step: usize, iteration: usize },

    #[error("grid too small: {n_nodes} nodes, stencil needs at least {required}")]
    GridTooSmall { n_nodes: usize, required: usize },

    #[error("grids are not nested: fine {fine} nodes, coarse {coarse} nodes")]
    NonNestedGrids { fine: usize, coarse: usize },

    #[error("vacuum is generated by the Riemann data")]
    Vacuum,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
