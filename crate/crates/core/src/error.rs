use thiserror::Error;

/// Errors surfaced by corpus loading, model io, training and decoding.
#[derive(Debug, Error)]
pub enum EdtError {
    #[error("corpus error in document `{doc_id}`: {message}")]
    Corpus { doc_id: String, message: String },

    #[error("gold annotation unreachable in document `{doc_id}`: {message}")]
    GoldUnreachable { doc_id: String, message: String },

    #[error("resource `{path}`: {message}")]
    Resource { path: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model file error: {0}")]
    Model(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, EdtError>;

impl EdtError {
    pub fn corpus(doc_id: impl Into<String>, message: impl Into<String>) -> Self {
        EdtError::Corpus {
            doc_id: doc_id.into(),
            message: message.into(),
        }
    }

    pub fn resource(path: impl Into<String>, message: impl Into<String>) -> Self {
        EdtError::Resource {
            path: path.into(),
            message: message.into(),
        }
    }
}
