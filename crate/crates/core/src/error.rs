use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid specs do not match")]
    GridMismatch,

    #[error("bad magic: expected \"QVG1\"")]
    BadMagic,

    #[error("unsupported QVG version {0}")]
    UnsupportedVersion(u32),

    #[error("unsupported QVG dtype {0}")]
    UnsupportedDtype(u8),

    #[error("truncated payload: header needs {expected} bytes, file has {found}")]
    TruncatedPayload { expected: u64, found: u64 },

    #[error("trailing data: header needs {expected} payload bytes, file has {found}")]
    TrailingData { expected: u64, found: u64 },

    #[error("grid dimensions overflow the addressable size")]
    DimsOverflow,

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("core proximity: point is {distance:.3e} from the filament, core radius {core:.3e}")]
    CoreProximity { distance: f64, core: f64 },

    #[error("on-cut: point is {distance:.3e} from the Seifert mesh")]
    OnCut { distance: f64 },

    #[error("ill-conditioned probe: circulation/gamma = {ratio} is not near an integer")]
    IllConditionedProbe { ratio: f64 },

    #[error("mesh orientation: {0}")]
    MeshOrientation(String),

    #[error("mesh boundary mismatch: {0}")]
    BoundaryMismatch(String),

    #[error("mesh is not planar (deviation {deviation:.3e})")]
    NonPlanar { deviation: f64 },

    #[error("OFF parse error at line {line}: {message}")]
    MeshFormat { line: usize, message: String },

    #[error("mesh required for multi-valued potential")]
    MeshRequired,

    #[error("filament leaves the grid box")]
    FilamentOutsideGrid,

    #[error("no vortex: gamma = 0 leaves psi_nu single-valued for every nu")]
    NoVortex,

    #[error("norm drift {drift:.3e} at step {step} exceeds {limit:.1e}")]
    NormDrift { step: usize, drift: f64, limit: f64 },

    #[error("time step {dt:.3e} exceeds the stability bound {limit:.3e}; norm drift is not controlled")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("fixed-point iteration did not converge at step {step} (change {change:.3e})")]
    FixedPointDiverged { step: usize, change: f64 },

    #[error("node mask covers {fraction:.3} of the occupied region (limit {limit})")]
    MaskExceeded { fraction: f64, limit: f64 },

    #[error("vector potential is not transverse: relative divergence {divergence:.3e}")]
    GaugeViolation { divergence: f64 },

    #[error("I/O error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for the aborts raised by solvers and diagnostics, as opposed to
    /// malformed input or I/O failures.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::CoreProximity { .. }
                | Error::OnCut { .. }
                | Error::IllConditionedProbe { .. }
                | Error::NormDrift { .. }
                | Error::StepTooLarge { .. }
                | Error::FixedPointDiverged { .. }
                | Error::MaskExceeded { .. }
                | Error::GaugeViolation { .. }
        )
    }
}
