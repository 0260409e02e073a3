//! Economy primitives: type distributions, the benefit technology and
//! reservation profiles, plus validation of the standing assumptions.

pub mod distribution;
pub mod economy;
pub mod reservation;
pub mod technology;
pub mod validate;

pub use distribution::{hazard_high, hazard_low, virtual_value_gamma, DistKind, DistSpec, TypeDistribution};
pub use economy::{Dynamic, Economy, LinearOutsideOption};
pub use reservation::{Curvature, ReservationKind, ReservationProfile, ReservationSpec};
pub use technology::{TechKind, TechSpec, Technology};
pub use validate::{validate_economy, AssumptionCheck, ValidationReport};
