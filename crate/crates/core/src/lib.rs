//! Numerical engine for warped-product metrics of positive scalar curvature.
//!
//! The crate builds torpedo metrics, Gromov–Lawson bend curves, the
//! collar-creating ODE families and the disc deformation into locally
//! torpedo form, and verifies a scalar curvature floor at every stage.

// `!(x > b)` is used on purpose so that NaN counts as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bend;
pub mod cutoff;
pub mod deform;
pub mod error;
pub mod io;
pub mod isometry;
pub mod jet;
pub mod mollifier;
pub mod par;
pub mod quad;
pub mod smooth;
pub mod spline;
pub mod warped;

pub use error::{GlError, Result};
pub use jet::Jet;
pub use par::Exec;
pub use smooth::SmoothFn;
pub use warped::{CurvatureReport, ProfileKind, WarpingProfile};
