use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("below condensation threshold: {thermal:.6e} thermal photons exceed N_t - 1 = {limit:.6e}")]
    BelowThreshold { thermal: f64, limit: f64 },

    #[error("drift matrix is not stable (max Re lambda = {max_real:.6e}); eigenvalues: {}", fmt_eigs(.eigenvalues))]
    Unstable { max_real: f64, eigenvalues: [Complex64; 4] },

    #[error("ill-conditioned linear system: {0}")]
    Conditioning(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("pole: |d| = {modulus:e} at omega = {omega:e}")]
    Pole { omega: f64, modulus: f64 },

    #[error("unphysical numerical result: {0}")]
    Physicality(String),

    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_eigs(eigs: &[Complex64; 4]) -> String {
    eigs.iter()
        .map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im))
        .collect::<Vec<_>>()
        .join(", ")
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
