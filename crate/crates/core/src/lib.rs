//! Shear coordinates of circle homeomorphisms on the Farey tesselation.
//!
//! The crate computes:
//!
//! * shear functions of orientation-preserving boundary homeomorphisms on the
//!   Farey tesselation of the hyperbolic plane, the fan quantities s(p;m,k),
//!   the shear norm, and the shear / asymptotic-shear pseudometrics,
//! * the characteristic map reconstructing a boundary map from its shears,
//! * numerical Douady-Earle (conformal barycentric) extensions, their Beltrami
//!   coefficients and dilatation estimates, including a piecewise-linear
//!   counter-example family whose dilatation at the origin blows up while the
//!   map keeps fixing four symmetric boundary points,
//! * sampled estimators for cross-ratio and conformal-modulus distortion
//!   metrics on degenerating quadruples.
//!
//! All tesselation combinatorics run in exact integer arithmetic; analytic
//! parts are f64 with explicitly stated tolerances.

pub mod boundary;
pub mod douady_earle;
pub mod farey;
pub mod geom;
pub mod metrics;
pub mod modulus;
pub mod shear;
