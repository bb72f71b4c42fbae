//! Crate-wide error type.

use thiserror::Error;

/// Why a point was rejected as lying outside the image of a decomposition map.
///
/// Inversion errors carry one of these so callers can report exactly which
/// predicate failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageViolation {
    /// `sgn (P_i p)^2 != eps_i` for the named spherical factor.
    #[error("sgn condition violated for factor {factor}")]
    SignCondition { factor: usize },
    /// `<a, p> <= 0` in the null case.
    #[error("<a,p> <= 0 (null-case half space violated)")]
    NonPositiveNullPairing,
    /// The point passes the sign test but sits too close to the boundary for
    /// the inverse formulas to divide safely.
    #[error("point within the near-boundary exclusion zone of factor {factor}")]
    NearBoundary { factor: usize },
    /// Connected-component restriction `<a_i, P_i p> > 0` violated.
    #[error("connected-component cut violated for factor {factor}")]
    ComponentCut { factor: usize },
    /// The point does not lie in the decomposed carrier subspace.
    #[error("point is not in the decomposed subspace")]
    OutsideCarrier,
    /// Restricted decompositions only: the point is off the hyperquadric.
    #[error("point does not satisfy <p,p> = 1/kappa")]
    OffQuadric,
    /// Restricted decompositions only: geodesic-factor half-space cut.
    #[error("geodesic-factor component cut <kappa p_bar, p_0> > 0 violated")]
    GeodesicComponentCut,
}

/// Errors produced by the geometry layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("spaces disagree: E^{dim_a}_{idx_a} vs E^{dim_b}_{idx_b}")]
    SpaceMismatch {
        dim_a: usize,
        idx_a: usize,
        dim_b: usize,
        idx_b: usize,
    },
    #[error("invalid space: index {index} exceeds dimension {dim} or dim = 0")]
    InvalidSpace { dim: usize, index: usize },
    #[error("basis is rank deficient (rank {rank} < {count} vectors)")]
    RankDeficient { rank: usize, count: usize },
    #[error("subspace is degenerate; {operation} requires a non-degenerate subspace")]
    DegenerateSubspace { operation: &'static str },
    #[error("vector is not orthogonal to the subspace ({context})")]
    NotOrthogonal { context: &'static str },
    #[error("expected a lightlike vector ({context})")]
    NotLightlike { context: &'static str },
    #[error("expected a non-null vector ({context})")]
    NullVector { context: &'static str },
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
    #[error("initial data mixes lightlike a-vectors {lightlike:?} with non-lightlike {non_lightlike:?}; build mixed cases via composition")]
    MixedCausalTypes {
        lightlike: Vec<usize>,
        non_lightlike: Vec<usize>,
    },
    #[error("point outside the decomposition domain: {0}")]
    OutOfDomain(String),
    #[error("point outside the decomposition image: {0}")]
    OutOfImage(#[from] ImageViolation),
    #[error("vector is not tangent to factor {factor} at the given point")]
    NotTangent { factor: usize },
    #[error("decomposition is not in canonical form; {operation} requires canonical form")]
    NotCanonical { operation: &'static str },
    #[error("base point is lightlike; the restriction curvature 1/<p,p> is undefined")]
    LightlikeBasePoint,
    #[error("incompatible composition: {0}")]
    IncompatibleComposition(String),
    #[error("map is not an isometry ({context}; max defect {defect:.3e})")]
    NotIsometry { context: &'static str, defect: f64 },
    #[error("paraboloid embeddings disagree")]
    EmbeddingMismatch,
    #[error("closed-form circle evaluation requires a proper circle; state is {class}")]
    NotProperCircle { class: &'static str },
    #[error("invalid circle state: {0}")]
    InvalidCircleState(String),
    #[error("chart coordinates outside the chart domain: {0}")]
    OutOfChartDomain(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, GeomError>;
