use thiserror::Error;

/// Errors produced by the reconstruction library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    Dimension {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("degenerate reference image: {0}")]
    DegenerateReference(&'static str),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("mask would contain no samples (density {density})")]
    EmptyMask { density: f64 },

    #[error("density {requested} unreachable within tolerance {tolerance} (closest {closest})")]
    DensityUnreachable {
        requested: f64,
        tolerance: f64,
        closest: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_shape(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
