use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("schedule is infeasible: {0}")]
    InfeasibleSchedule(String),
    #[error("instance has {n} jobs, more than the supported {max}")]
    TooManyJobs { n: usize, max: usize },
    #[error("replay log was recorded for instance {expected}, got {actual}")]
    DigestMismatch { expected: String, actual: String },
    #[error("malformed replay log at line {line}: {msg}")]
    Log { line: usize, msg: String },
    #[error("reference node count is zero")]
    ZeroReference,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
