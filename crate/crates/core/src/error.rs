use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("invalid shift: {shift:.6e} is below the largest eigenvalue {lambda_max:.6e}")]
    InvalidShift { shift: f64, lambda_max: f64 },
    #[error("distance {0} m is below reference distance")]
    BelowReferenceDistance(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible design: {0}")]
    Infeasible(String),
    #[error("missing channel for link {0}")]
    MissingChannel(String),
    #[error("RIS {ris} is not on any reflection path of user {user}")]
    UnusedRis { user: usize, ris: usize },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("dual solver did not converge: {0}")]
    DualNonConvergence(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
