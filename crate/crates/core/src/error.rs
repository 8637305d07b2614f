use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("the zero wavevector is not a field mode")]
    ZeroMode,

    #[error("polarization index {0} outside 0..=3")]
    InvalidPolarization(usize),

    #[error("helicity {0} outside {{-1, 0, 1}}")]
    InvalidHelicity(i32),

    #[error("mode {0} is not part of the Fock space")]
    UnknownMode(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("state has indefinite norm {norm:e}, at or below tolerance {tol:e}")]
    ZeroNormState { norm: f64, tol: f64 },

    #[error("mode set is not closed under k -> -k")]
    NotNegationClosed,

    #[error("state is not physical: constraint residual {residual:e} exceeds {tol:e}")]
    NotPhysical { residual: f64, tol: f64 },

    #[error("operation would create photons beyond the occupation cap {cap}")]
    TruncationOverflow { cap: usize },

    #[error("occupation cap {0} unsupported (must be 1..=4)")]
    UnsupportedCap(usize),

    #[error("metric perturbation amplitude {0} outside the weak-field range |eps| <= 0.1")]
    WeakFieldViolated(f64),

    #[error("perturbation model is not periodic on the box")]
    NonPeriodicPerturbation,

    #[error("constraint kernel is empty")]
    EmptyKernel,

    #[error("sector of dimension {dim} exceeds the dense null-space limit {limit}")]
    SubspaceTooLarge { dim: usize, limit: usize },

    #[error("grid with {points} points per axis cannot resolve wavenumbers up to {max_index} (need >= {required})")]
    UnderResolvedGrid {
        points: usize,
        max_index: i64,
        required: usize,
    },

    #[error("iterative solve did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}
