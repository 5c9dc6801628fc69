//! Stickelberger series over function-field towers, their character values at u = 1, the
//! element θ, Ω factors, the class-number identity and main-conjecture drivers.

pub mod assignment;
pub mod identity;
pub mod imc;
pub mod omega;
pub mod series;
pub mod theta;

pub use assignment::{FrobeniusAssignment, SplitData, StickelbergerInput, TowerKind};
pub use identity::{verify_class_number_identity, IdentityMode, IdentityReport};
pub use imc::{imc_check, ImcConfig, ImcReport, Verdict};
pub use omega::{omega_factors, OmegaReport};
pub use series::{build_series, modify_v0, StickSeries};
pub use theta::{theta_element, ThetaElement};
