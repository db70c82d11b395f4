use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid truncated space: fock_dim = {fock_dim}, atom_dim = {atom_dim}")]
    InvalidSpace { fock_dim: usize, atom_dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("atomic level {level} outside 1..={atom_dim}")]
    InvalidLevel { level: usize, atom_dim: usize },

    #[error(
        "fock_dim = {fock_dim} too small for |alpha|^2 = {alpha_sq}: Poisson tail {tail:e} >= 1e-10"
    )]
    TruncationTooSmall {
        fock_dim: usize,
        alpha_sq: f64,
        tail: f64,
    },

    #[error("invalid parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("state vector not normalized: |psi|^2 = {0}")]
    NotNormalized(f64),

    #[error("invalid density matrix ({reason}): {value:e}")]
    InvalidDensity { reason: &'static str, value: f64 },

    #[error("inconsistent decoherence factor: f = {f:e} exceeds exp(-2|alpha|^2) = {bound:e}")]
    NegativeProbability { f: f64, bound: f64 },

    #[error("branch probability {0:e} is negligible")]
    NegligibleBranch(f64),

    #[error("state is not pure: Tr(rho^2) = {0}")]
    NotPure(f64),

    #[error("step too large: {quantity} = {value:e} exceeds {limit:e}")]
    StepTooLarge {
        quantity: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("collapse probability {dp:e} exceeds 0.1 at t = {t}")]
    DeltaPTooLarge { dp: f64, t: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
