//! Finite fields, curves over them, zeta numerators, places and Carlitz Frobenius data.

pub mod carlitz;
pub mod curve;
pub mod fq;
pub mod fq_poly;
pub mod places;
pub mod zeta;

pub use carlitz::CarlitzData;
pub use curve::{Curve, CurveModel, CurveSpec};
pub use fq::FqField;
pub use places::{Place, PlaceDescriptor, PlaceLedger};
pub use zeta::{class_number_layer, ClassNumberLayer, ZetaNumerator};
