use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("format error: {0}")]
    Format(String),

    #[error("profile tail has not decayed: |q({x}) - {target}| = {defect:e} exceeds {tol:e}")]
    TailNotDecayed { x: f64, target: f64, defect: f64, tol: f64 },
    #[error("step size underflow at x = {x} (k = {k})")]
    StiffnessFailure { x: f64, k: String },
    #[error("k = {0} is within the branch-point exclusion radius of gamma_plus")]
    GammaNearZero(String),
    #[error("k = {0} is not on an open branch cut")]
    NotOnCut(String),
    #[error("k = {0} is not on the requested contour segment")]
    NotOnSegment(String),
    #[error("argument principle counts {winding} zeros but {found} were refined")]
    WindingMismatch { winding: i64, found: usize },
    #[error("zero at {0} is not simple")]
    NonSimpleZero(String),
    #[error("Jost columns are not proportional at k = {k} (relative mismatch {mismatch:e})")]
    ColumnsNotProportional { k: String, mismatch: f64 },

    #[error("segment collapses: q_minus - q_plus = {gap:e} is below the exclusion radius {eps:e}")]
    DegenerateSegment { gap: f64, eps: f64 },
    #[error("point {0} lies outside the sampled scattering data")]
    RhoInterpolationGap(String),
    #[error("reflection coefficient too small to invert at k = {0}")]
    NearSingularRho(String),
    #[error("collocation system is singular (reciprocal condition {rcond:e})")]
    SingularSystem { rcond: f64 },
    #[error("jump residual {residual:e} exceeds {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("reconstruction formula and large-k limit disagree by {diff:e}")]
    LimitMismatch { diff: f64 },

    #[error("time step {dt:e} violates the stability bound {bound:e}")]
    StabilityViolation { dt: f64, bound: f64 },
    #[error("boundary drift {drift:e} exceeds tail tolerance")]
    BoundaryDrift { drift: f64 },
    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

impl Error {
    /// True for errors caused by the user's input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::Format(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
