//! Brute-force certification of solver output and numerical demonstrations
//! of the VCG impossibility, dynamic repetition and stochastic provision.
//!
//! The oracle evaluates utilities directly from the allocation and transfer
//! rules; it never calls solver first-order conditions.

mod extensions;
mod oracle;
mod vcg;

pub use extensions::{
    dynamic_check, random_lotteries, stochastic_dominance_check, DominanceReport, DominanceRow, DynamicReport, Lottery,
};
pub use oracle::{
    budget_slack, certify, check_dsic, check_participation, Deviation, IrSlack, MonotoneViolation, OracleReport,
    DEFAULT_GRID, ORACLE_TOL,
};
pub use vcg::{vcg_demo, VcgReport};
