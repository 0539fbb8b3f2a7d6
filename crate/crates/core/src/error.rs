use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Coordinates are reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular point at ({x}, {y}, {z}): within {exclusion} of a string, filament or pole")]
    SingularPoint { x: f64, y: f64, z: f64, exclusion: f64 },

    #[error("adaptive quadrature did not converge after {depth} bisections (last change {change:e})")]
    NoConvergence { depth: usize, change: f64 },

    #[error("contour is not planar (out-of-plane deviation {deviation:e})")]
    NonPlanarContour { deviation: f64 },

    #[error("point ({x}, {y}) lies on the contour")]
    PointOnContour { x: f64, y: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("packet width {sigma} is narrower than twice the grid spacing {spacing}")]
    PacketTooNarrow { sigma: f64, spacing: f64 },

    #[error("packet does not fit: {0}")]
    PacketOutOfBounds(String),

    #[error("packet puts {fraction:e} of its norm on hard-wall nodes")]
    PacketOverlapsWall { fraction: f64 },

    #[error("lattice edge ({i}, {j}) {axis} passes through a singular filament")]
    SingularEdge { i: usize, j: usize, axis: char },

    #[error("tridiagonal solve broke down at row {row}")]
    LinearSolveFailure { row: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("region is not simply connected: loop holonomy {holonomy} rad")]
    RegionNotSimplyConnected { holonomy: f64 },

    #[error("anchor node is outside the region")]
    AnchorOutsideRegion,

    #[error("transmitted norm {transmitted:e} is below the detection threshold")]
    NoTransmission { transmitted: f64 },

    #[error("no fringe: spectral peak {peak:e} below noise floor {floor:e}")]
    NoFringe { peak: f64, floor: f64 },

    #[error("ring state is not self-consistent: fluxoid residual {residual}")]
    InconsistentState { residual: f64 },

    #[error("trajectory hit a singular set at t = {t}")]
    SingularEncounter { t: f64 },

    #[error("no string gauge has the requested piercing for this contour")]
    NoMatchingGauge,

    #[error("gauge function {0} cannot be serialized")]
    NotSerializable(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn singular<T: crate::Real>(r: crate::Vec3<T>, eps: T) -> Self {
        Error::SingularPoint { x: r.x.as_f64(), y: r.y.as_f64(), z: r.z.as_f64(), exclusion: eps.as_f64() }
    }
}
