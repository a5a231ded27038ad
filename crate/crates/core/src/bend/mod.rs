//! Plane curves in the (t, r) quadrant given by their curvature, the
//! two-bend construction and the homotopy that straightens it.

mod admissible;
mod alpha1;
pub mod cap;
mod curve;
mod gl;
mod kprop;
mod neck;

pub use admissible::{check_admissible, AdmissibilityReport, Violation, ADMISSIBLE_TOL};
pub use alpha1::{alpha1_family, Alpha1};
pub use curve::{curve_from_curvature, CurvatureFunction, PlaneCurve};
pub use gl::{curvature_estimate, gl_bend_construct, gl_bend_construct_with, BendOptions, EstimateReport, GlBend, ESTIMATE_RATIO};
pub use kprop::{cutoff_curvature, cutoff_function, find_kprop_delta};
pub use neck::{neck_report, neck_scalar_curvature_model, NeckModel};
