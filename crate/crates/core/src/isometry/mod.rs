//! The canonical square-root isometry between inner products and the
//! stretched cylinder over a path of fibre metrics.

mod sqrt;
mod stretch;

pub use sqrt::{spd_sqrt, InnerProduct};
pub use stretch::{gajer_stretch, radius_path, stretch_profile, GajerStretch, StretchSpec};
