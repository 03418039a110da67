//! Numerical kernel for surface Beris-Edwards nematodynamics.
//!
//! Surfaces are single periodic charts sampled on a structured grid. All
//! tensor fields live as Cartesian 3x3 proxies at the grid nodes, so every
//! model term can be written exactly as its embedded formula. Derivatives
//! are pseudo-spectral (default) or fourth-order central differences.
//!
//! Module map:
//! - [`geometry`]: charts, metric, shape operator, curvatures.
//! - [`fields`]: field containers and the componentwise calculus.
//! - [`qtensor`]: pointwise Q-tensor algebra.
//! - [`kinematics`]: deformation gradients and observer-invariant rates.
//! - [`terms`]: energies, stresses, forces and molecular fields.
//! - [`solvers`]: time integrators for the closed special cases.
//! - [`diagnostics`]: energy reports, audits, Leslie coefficients, lemma checks.
//! - [`io`]: snapshot writers.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod io;
pub mod kinematics;
pub mod qtensor;
pub mod solvers;
pub mod terms;

pub use error::{Error, Result};
pub use fields::{
    EmbeddedTensor2Field, Field, MatrixField, Rank3, Rank3Field, ScalarField, Subspace, TangentTensor2Field,
    TangentVectorField, VectorField,
};
pub use geometry::{ChartGeometry, DerivativeScheme, Grid, SurfaceKind};
pub use kinematics::{DeformationGradients, RateFlavor, VelocityState};
pub use qtensor::{QDecomposition, ThermotropicRoots};
pub use terms::{ModelParams, TermBundle, TermTag};

/// Small dense types used throughout.
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;
