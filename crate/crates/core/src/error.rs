//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::kinematics::RateFlavor;

/// All failure modes of the numerical kernel.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid {n1}x{n2}: each side must be at least 8 and even")]
    InvalidGrid { n1: usize, n2: usize },

    #[error("surface cannot be covered by a single periodic chart: {0}")]
    NonPeriodicDomain(String),

    #[error("degenerate metric at node {node} (det g = {det:e})")]
    DegenerateMetric { node: usize, det: f64 },

    #[error("shape mismatch: expected {expected} nodes, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("field violates its declared tensor class at node {node}: {reason}")]
    ClassViolation { node: usize, reason: String },

    #[error("not a Q-tensor at node {node}: {reason}")]
    NotAQTensor { node: usize, reason: String },

    #[error("director at node {node} is not a unit vector (|d| = {norm})")]
    NonUnitDirector { node: usize, norm: f64 },

    #[error("unknown subspace '{0}'")]
    UnknownSubspace(String),

    #[error("rate flavor mismatch: model uses {expected:?}, rate supplied as {got:?}")]
    RateFlavorMismatch { expected: RateFlavor, got: RateFlavor },

    #[error("unknown constraint '{0}'")]
    UnknownConstraint(String),

    #[error("multiplier has the wrong shape for constraint {gamma}: {reason}")]
    MultiplierShape { gamma: String, reason: String },

    #[error("blow-up at t = {t}: max-norm of {field} is {value:e}, bound {bound:e}")]
    BlowUp { t: f64, field: String, value: f64, bound: f64 },

    #[error("pressure projection did not converge: relative residual {residual:e} after {iterations} iterations")]
    ProjectionNonConvergence { residual: f64, iterations: usize },

    #[error("at least 3 samples are required, got {0}")]
    TooFewSamples(usize),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("solver requires {required}, got {got}")]
    IncompatibleChart { required: String, got: String },
}

pub type Result<T> = std::result::Result<T, Error>;
