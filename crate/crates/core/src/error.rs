use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid harmonic index: {0}")]
    InvalidIndex(String),

    #[error("invalid angular point: {0}")]
    InvalidPoint(String),

    /// Gradient requested at a coordinate singularity.
    #[error("coordinate pole: {0}")]
    Pole(String),

    #[error("resource guard: {nodes} quadrature nodes exceeds cap {cap}")]
    ResourceCap { nodes: u128, cap: u128 },

    /// Radius of the perturbed boundary is not positive somewhere.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Quadrature grid cannot resolve the requested integrand exactly.
    #[error("precision error: {0}")]
    Precision(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid perturbation function: {0}")]
    InvalidPerturbation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
