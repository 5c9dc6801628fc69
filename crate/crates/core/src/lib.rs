//! Finite-level structure theory of the Iwasawa algebra Z_ℓ[[Γ]] for abelian pro-p groups Γ
//! (ℓ ≠ p), together with the function-field analytic side: Stickelberger series, character
//! values, Ω factors and class-number checks.

pub mod arith;
pub mod bigjson;
pub mod character_lattice;
pub mod coeff_rings;
pub mod error;
pub mod function_fields;
pub mod iwasawa_algebra;
pub mod linalg;
pub mod normic;
pub mod sampling;
pub mod sinnott;
pub mod stickelberger;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
