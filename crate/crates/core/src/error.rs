use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pose ({x:.3}, {y:.3}) is outside free space")]
    InvalidPose { x: f64, y: f64 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("failed to load {what}: {reason}")]
    Load { what: &'static str, reason: String },

    #[error("edge {src} -> {dst} not found")]
    EdgeNotFound { src: u64, dst: u64 },

    #[error("vertex {0} is not in the graph")]
    InvalidVertex(u64),

    #[error("goal vertex {0} is not in the graph")]
    InvalidGoal(u64),

    #[error("route error: {0}")]
    Route(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn load(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Load {
            what,
            reason: reason.into(),
        }
    }
}
