//! Agenda-setter-optimal dominant-strategy mechanisms for public goods.

pub mod cli;
pub mod error;
pub mod mechanism;
pub mod model;
pub mod model_file;
pub mod numerics;
pub mod report;
pub mod regimes;
pub mod solver_core;
pub mod transfers;
pub mod verify;

pub use error::{MechError, Result};
