use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit-code classes:
/// invalid input / degenerate construction (exit 2) versus numerical guard
/// trips during a run (exit 3).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("factor index {index} out of range for shape {shape:?}")]
    BadFactor { index: usize, shape: Vec<usize> },

    #[error("cutoff {cutoff} too small: geometric tail {tail:.3e} >= tolerance {tol:.3e} (lambda = {lambda:.6})")]
    CutoffTooSmall {
        cutoff: usize,
        lambda: f64,
        tail: f64,
        tol: f64,
    },

    #[error("degenerate superposition: branches cancel (squared norm {norm_sq:.3e})")]
    DegenerateSuperposition { norm_sq: f64 },

    #[error("odd two-mode squeezed state is undefined at r = 0")]
    OddStateAtZeroSqueezing,

    #[error("non-Hermitian Hamiltonian sample at t = {t}: defect {defect:.3e}")]
    NonHermitianHamiltonian { t: f64, defect: f64 },

    #[error("norm drift {drift:.3e} exceeded budget {budget:.3e} during propagation")]
    NormDrift { drift: f64, budget: f64 },

    #[error("cutoff overflow at t = {t}: top-level population {population:.3e} > {limit:.3e}")]
    CutoffOverflow { t: f64, population: f64, limit: f64 },

    #[error(
        "measurement outcome has probability {probability:.3e}; post-measurement state undefined"
    )]
    ZeroProbabilityOutcome { probability: f64 },

    #[error("cannot normalize a zero state vector")]
    ZeroNorm,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for guard trips that abort an otherwise valid run (CLI exit 3);
    /// false for invalid requests and degenerate constructions (CLI exit 2).
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::NonHermitianHamiltonian { .. }
                | Error::NormDrift { .. }
                | Error::CutoffOverflow { .. }
                | Error::ZeroNorm
        )
    }
}
