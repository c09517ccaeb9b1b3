//! Rate-region simulator for a full-duplex cognitive-relay NOMA downlink.
//!
//! A cognitive base station serves a near user directly and a far user through
//! a full-duplex multi-antenna decode-and-forward relay, underlaid beneath a
//! primary link that caps the tolerable interference power. The crate provides:
//!
//! * [`optimizer`] — joint transmit/receive beamforming and power allocation
//!   via semidefinite relaxation plus a line search over the base-station power;
//! * [`fixedbf`] — closed-form power allocation for fixed MRT/MRC beamformers,
//!   and a half-duplex baseline under the RF-chain-preserved convention;
//! * [`oracle`] — an exhaustive grid-search verifier for small antenna counts;
//! * [`driver`] — Monte Carlo rate-region sweeps with CSV output and a CLI.
//!
//! Supporting layers: [`cxmat`] (dense complex Hermitian linear algebra),
//! [`model`] (scenario parameters and seeded channel generation), [`sinr`]
//! (closed-form SINR/rate/constraint expressions) and [`sdp`] (a small dense
//! semidefinite-program solver over the Hermitian PSD cone).

pub mod cxmat;
pub mod driver;
pub mod fixedbf;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod sdp;
pub mod sinr;

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} relative)")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index}, threshold {threshold:.3e})")]
    NotPositiveDefinite {
        pivot: f64,
        index: usize,
        threshold: f64,
    },

    #[error("eigendecomposition did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:.3e}, dim {dim})")]
    NoConvergence {
        sweeps: usize,
        off_diagonal: f64,
        dim: usize,
    },

    #[error("singular rank-one update: |1 + u^H B^-1 u| = {denominator:.3e}")]
    SingularUpdate { denominator: f64 },

    #[error("target far rate is infeasible: 2^rbar - 1 = {r_tilde} >= a2/a1 = {ratio}")]
    InfeasibleRate { r_tilde: f64, ratio: f64 },

    #[error("degenerate denominator in {context}: {value:.3e}")]
    DegenerateDenominator { context: &'static str, value: f64 },

    #[error("channel vector is zero where a nonzero direction is required")]
    ZeroChannel,

    #[error("matrix is numerically zero (trace {trace:.3e})")]
    ZeroMatrix { trace: f64 },

    #[error("negative relaxation bound (q1={q1:.3e}, q2={q2:.3e}, q4={q4:.3e}): this transmit power is infeasible")]
    NegativeBound { q1: f64, q2: f64, q4: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
