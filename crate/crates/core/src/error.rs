use thiserror::Error;

/// Errors surfaced by the algebra, factorization and map-decomposition layers.
#[derive(Debug, Error)]
pub enum ZpdError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("block index {index} out of range (algebra has {blocks} blocks)")]
    BlockIndexOutOfRange { index: usize, blocks: usize },

    #[error("rank hypothesis violated: block {block} has rank {rank} > {dim} - 2")]
    RankHypothesisViolated { block: usize, rank: usize, dim: usize },

    #[error("uv != 0: the rank-one pair does not have zero product (|<f_u, e_v>| = {inner})")]
    RankOnePairNotZero { inner: f64 },

    #[error("not a zero-product pair: |xy| = {residual} exceeds tolerance {tol}")]
    NotZeroProductPair { residual: f64, tol: f64 },

    #[error("cross-product residual too large: {residual} > {tol}")]
    CrossProductResidualTooLarge { residual: f64, tol: f64 },

    #[error("not a partial isometry: |ee*e - e| = {residual}")]
    NotPartialIsometry { residual: f64 },

    #[error("no nonzero annihilator in block {block}")]
    NoAnnihilatorInBlock { block: usize },

    #[error("element is not supported on a single block")]
    NotSingleBlock,

    #[error("orthonormal complement too small: need {needed} vectors, found {available}")]
    InsufficientComplement { needed: usize, available: usize },

    #[error("degenerate RNG stream: no invertible sample after {retries} retries")]
    DegenerateRngStream { retries: usize },

    #[error("empty fiber sample")]
    EmptyFiber,

    #[error("{which} not invertible (condition number {cond:.3e})")]
    NotInvertible { which: String, cond: f64 },

    #[error("map is not bijective")]
    NotBijective,

    #[error("map does not preserve zero products (worst |phi(x) psi(y)| = {worst})")]
    DoesNotPreserveZeroProducts { worst: f64 },

    #[error("weight is not central (worst commutator norm {worst})")]
    WeightNotCentral { worst: f64 },

    #[error("not derivable at c (worst Leibniz defect {worst})")]
    NotDerivableAtC { worst: f64 },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, ZpdError>;
