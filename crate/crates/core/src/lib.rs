//! Numerical toolkit for rotationally symmetric ancient Ricci flows on S³.
//!
//! The flow is described by the profile `F(z, t)`, the radius of the sphere
//! of symmetry at signed arc length `z` from a reference point. Modules:
//!
//! - [`bryant`]: the Bryant soliton profile and its structural constants.
//! - [`profile_pde`]: oval initial data, the nonlocal profile PDE and its
//!   asymptotic diagnostics.
//! - [`rescale`]: cylindrical and tip frames, and the `(α, β, γ)` family of
//!   transformed solutions.
//! - [`weights`]: tip-region weights and the weighted Poincaré inequality.
//! - [`spectral`]: Gaussian-weighted function space and the drift operator.
//! - [`difference`]: diagnostics comparing two solutions.

// `!(x > 0.0)` is used on purpose so that NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::result_large_err)]

pub mod bryant;
pub mod difference;
pub mod error;
pub mod numerics;
pub mod profile_pde;
pub mod rescale;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
