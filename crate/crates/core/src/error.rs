use thiserror::Error;

use crate::numerics::Backend;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("backend error: {backend} queries are not supported by {set}")]
    Backend { set: String, backend: Backend },
    #[error("catalog error: {0}")]
    Catalog(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
