use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid discretization or problem parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the domain of a special function or evaluator.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("interpolation source nodes are not distinct (indices {0} and {1})")]
    DuplicateNodes(usize, usize),

    #[error("unknown potential `{0}`")]
    UnknownPotential(String),

    /// The interface system `I - R33(beta) R33(alpha)` of a merge is numerically singular.
    #[error("merge at box {node} is near-resonant (condition estimate {condition:.3e})")]
    MergeResonance { node: usize, condition: f64 },

    /// `R - I` is numerically singular at the top level, so the interior
    /// Dirichlet-to-Neumann map does not exist at this wavenumber.
    #[error(
        "domain resonance: condition estimate of (R - I) is {condition:.3e} (threshold {threshold:.1e}); \
         kappa is close to an interior Dirichlet eigenvalue of the box, enlarge the domain \
         (for example add a column of leaf boxes) and rebuild"
    )]
    DomainResonance { condition: f64, threshold: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    /// Adaptive ODE integration could not meet its tolerance.
    #[error("integration failure: {0}")]
    Integration(String),
}
