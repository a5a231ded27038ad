//! Deformation of a disc metric of positive scalar curvature into one that is
//! locally torpedo near the centre.

mod annulus;
mod chain;
mod collar;
mod locd;
mod locdef;
mod neck;
mod radial;

pub use annulus::{annulus_deform, bumped_annulus, AnnulusDeform};
pub use chain::ProfileChain;
pub use collar::{collar_constants, collar_deform, CollarConstants, CollarDeform, MIN_LOG10_ALPHA};
pub use locd::{locd_deform, LocdDeform, FLAT_TOL, NU_MARGIN};
pub use locdef::{
    bumped_torpedo, deformation_d, locdef, regression_set, retraction, retraction_homotopy_check, HomotopyCheck, Locdef, TraceRow, OUTER_COLLAR,
};
pub use neck::{neck_bound, neck_slope, AnnularFamily, Neck};
pub use radial::{annulus_pullback, disc_pullback, AnnulusMap, DiscMap};
