use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{what} has size {size}, above the supported limit {limit}")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("operation requires a graph built from a group and generator multiset")]
    NotCayley,

    #[error("generator multiset is not symmetric: {0}")]
    Asymmetric(String),

    #[error("low eigenspace has dimension {required}, above k_max = {k_max}")]
    DimensionCap { required: usize, k_max: usize },

    #[error("solver did not converge: {0}")]
    Solver(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn guard(what: &'static str, size: usize, limit: usize) -> Result<()> {
    if size > limit {
        Err(Error::SizeGuard { what, size, limit })
    } else {
        Ok(())
    }
}
