use thiserror::Error;

/// Errors raised by the enumeration kernels.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ground set size {0} outside supported range 1..=63")]
    GroundSize(usize),
    #[error("element {element} outside ground set [1, {n}]")]
    ElementOutOfRange { element: usize, n: usize },
    #[error("set has {found} distinct elements, family is {expected}-uniform")]
    WrongCardinality { expected: usize, found: usize },
    #[error("element {0} repeated within one set")]
    DuplicateElement(usize),
    #[error("families live on different ground sets ({0} vs {1})")]
    GroundMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    Parameter(&'static str),
    #[error("resource cap exceeded: {what} = {value} > {cap}")]
    Cap { what: &'static str, value: u128, cap: u128 },
    #[error("family is not intersecting")]
    NotIntersecting,
    #[error("family is not closed upwards")]
    NotUpSet,
    #[error("run list is not in descending order")]
    NotDescending,
    #[error("bias must lie strictly between 0 and 1")]
    Bias,
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// True for refusals caused by a resource cap rather than bad input.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::Cap { .. })
    }
}
