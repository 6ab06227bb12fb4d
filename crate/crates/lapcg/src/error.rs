use lapcg_core::perfmodel::PerfError;
use lapcg_core::solvers::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Breakdown(SolverError),
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Breakdown(_) => 2,
            CliError::Infeasible(_) => 3,
            _ => 1,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Breakdown { .. } => CliError::Breakdown(e),
            SolverError::Laplacian(l) => CliError::Infeasible(l.to_string()),
            SolverError::Dataflow(d) => CliError::Infeasible(d.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<PerfError> for CliError {
    fn from(e: PerfError) -> Self {
        match e {
            PerfError::NonPositiveConstant(_) => CliError::Usage(e.to_string()),
            other => CliError::Infeasible(other.to_string()),
        }
    }
}
