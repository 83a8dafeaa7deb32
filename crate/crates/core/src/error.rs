use thiserror::Error;

/// Errors raised by the numerical kernels and the force evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CasimirError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("order {order} exceeds the supported maximum {max}")]
    OrderOverflow { order: usize, max: usize },

    #[error("displacement is zero; the gradient is singular there")]
    SingularDisplacement,

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("spheres {0} and {1} overlap or touch")]
    Overlap(usize, usize),

    #[error("target index {target} out of range for {count} spheres")]
    TargetOutOfRange { target: usize, count: usize },

    #[error("round-trip series does not converge: spectral radius {0:.6} >= 1")]
    NonConvergentRoundTrip(f64),

    #[error("quadrature did not converge: estimated error {error:.3e} after {evals} evaluations")]
    QuadratureNonConvergence { error: f64, evals: usize },

    #[error("Matsubara cutoff {cutoff} too small: tail bound {tail:.3e} exceeds tolerance")]
    MatsubaraCutoff { cutoff: usize, tail: f64 },

    #[error("singular linear system in the multiple-scattering solve")]
    SingularSystem,
}

impl CasimirError {
    /// True for failures of a numerical limit process rather than bad input.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            CasimirError::NonConvergentRoundTrip(_)
                | CasimirError::QuadratureNonConvergence { .. }
                | CasimirError::MatsubaraCutoff { .. }
                | CasimirError::SingularSystem
        )
    }
}

pub type Result<T> = std::result::Result<T, CasimirError>;
