use thiserror::Error;

use crate::fragility::FragilityRun;
use crate::subsetsim::SsResult;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Total margin variance ζ² + σ_η² + σ_ε² is zero; the reliability index
    /// is undefined.
    #[error("degenerate margin variance (zeta^2 + sigma_eta^2 + sigma_eps^2 = 0)")]
    DegenerateVariance,

    /// PSD repair of the margin correlation matrix exceeded the jitter cap.
    #[error("margin correlation matrix is not positive definite within jitter cap {cap:e}")]
    IllConditionedCorrelation { cap: f64 },

    /// A margin vector does not match the number of random components.
    #[error("margin vector has dimension {got}, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A node id does not exist in the network.
    #[error("unknown node id `{0}`")]
    UnknownNode(String),

    /// Most-reliable-path weights must be non-negative.
    #[error("negative node weight {weight} for node `{node}`")]
    NegativeWeight { node: String, weight: f64 },

    /// Terminal sets must be non-empty.
    #[error("empty terminal set")]
    EmptyTerminals,

    /// k is outside 1..=N for k-out-of-N aggregation.
    #[error("k = {k} out of range for {n} OD pairs")]
    KOutOfRange { k: usize, n: usize },

    /// A conditional level cannot be advanced because no seed states exist.
    #[error("cannot advance level: no seed states in conditioning domain")]
    NoSeeds,

    /// Subset simulation did not reach the failure domain within the level cap.
    #[error("subset simulation exceeded {max_levels} levels without reaching the failure domain")]
    NoConvergence {
        max_levels: usize,
        partial: Box<SsResult>,
    },

    /// A specialized fragility run lost its conditional population; the curve
    /// produced so far is attached.
    #[error("specialized run aborted at Mw {mw}: empty conditional population")]
    EmptyConditional { mw: f64, partial: Box<FragilityRun> },

    /// A grid step needed more sub-levels than allowed; the curve produced so
    /// far is attached.
    #[error("specialized run exceeded {max_levels} sub-levels at Mw {mw}")]
    SpecializedNoConvergence {
        mw: f64,
        max_levels: usize,
        partial: Box<FragilityRun>,
    },

    /// Quadrature cannot resolve a near-singular correlation.
    #[error("bivariate quadrature near-singular: |rho| = {rho} too close to 1")]
    NearSingularCorrelation { rho: f64 },

    /// Structural problems in a network definition.
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    /// Configuration that violates a module precondition.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
