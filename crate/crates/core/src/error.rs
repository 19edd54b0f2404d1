use thiserror::Error;

/// Errors surfaced by the segmentation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Input decodes but is not an image format this library accepts.
    #[error("format error: {0}")]
    Format(String),

    /// Operands disagree on grid geometry, or a kernel exceeds the grid.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A caller-supplied parameter is outside its valid range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Input values are unusable (non-finite, empty, ...).
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
