use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Model(#[from] fracchem::Error),
    /// Scenario text that does not parse; the message carries line and column.
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("invalid scenario `{name}`: {reason}")]
    Scenario { name: String, reason: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown catalog scenario `{0}`")]
    UnknownScenario(String),
    #[error("bad value list `{spec}`: {reason}")]
    Values { spec: String, reason: String },
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
    let path = path.into();
    move |source| LabError::Io { path, source }
}
