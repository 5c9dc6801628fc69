//! Coefficient rings: Z/ℓ^K, its unramified cyclotomic extensions, and exact Z[ζ_{p^n}].

pub mod cyclo;
pub mod hensel;
pub mod poly;
pub mod unramified;
pub mod zl;

pub use cyclo::{orbit_product_to_integer, CycloExact};
pub use hensel::{hensel_cyclotomic_factors, CyclotomicFactorBasis};
pub use unramified::UnramifiedElement;
pub use zl::{PadicScalar, Valuation, Zl};
