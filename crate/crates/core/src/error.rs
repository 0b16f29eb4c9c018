use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The stacked projected pair `[R_F; R_M]` lost full column rank, which means
    /// the null spaces of the forward operator and the regularizer intersect.
    #[error("singular projected system: {0}")]
    SingularSystem(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("dense materialization refused for {cols} columns (limit {limit})")]
    TooLarge { cols: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Shape {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}
