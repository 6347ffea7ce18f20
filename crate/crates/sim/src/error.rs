use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{width}x{height} grid cannot hold {cells} cells")]
    Dimensions { width: usize, height: usize, cells: usize },
    #[error("the map has no open cell")]
    Empty,
    #[error("cell ({x}, {y}) is blocked or outside the map")]
    Blocked { x: usize, y: usize },
    #[error("interval must be at least 1")]
    Interval,
    #[error("cannot place {agents} agents on {cells} open cells")]
    Placement { agents: usize, cells: usize },
    #[error("replan period must be at least 1")]
    ReplanPeriod,
    #[error("conflict at step {step}: {what}")]
    Conflict { step: u64, what: String },
    #[error(transparent)]
    Cmpp(#[from] cmpp_core::CmppError),
}

impl SimError {
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            SimError::Parse { message, .. } => SimError::Parse { line, message },
            other => other,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
