use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the curve engine and its data loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid angular momentum: {0}")]
    InvalidAngularMomentum(String),

    #[error("cannot read species file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("species schema error: {0}")]
    Schema(String),

    #[error("invalid species data: field `{field}`{}: {reason}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    InvalidSpecies {
        field: String,
        line: Option<usize>,
        reason: String,
    },

    #[error("resonant evaluation: real frequency {z} hartree lies within 1e-6 hartree of a pole at {pole}")]
    ResonantEvaluation { z: f64, pole: f64 },

    #[error("invalid quadrature rule: {0}")]
    InvalidQuadrature(String),

    #[error("quadrature not converged: `{quantity}` changed by {relative_change:.3e} (relative) when doubling the node count")]
    QuadratureNotConverged {
        quantity: String,
        relative_change: f64,
    },

    #[error("distance must be positive, got R = {0} bohr")]
    NonPositiveDistance(f64),

    #[error("invalid radial grid: {0}")]
    InvalidGrid(String),

    #[error("curve tracking ambiguous between R = {r_from} and R = {r_to} bohr (overlap {overlap:.3})")]
    TrackingAmbiguous { r_from: f64, r_to: f64, overlap: f64 },

    #[error("classically forbidden at this R: R = {r} bohr, radicand {radicand:.3e}")]
    ClassicallyForbidden { r: f64, radicand: f64 },

    #[error("parallel curves, LZ model inapplicable")]
    ParallelCurves,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown diabatic state label p = {0}")]
    UnknownState(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
