// Comparisons are written as `!(a <= b)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod ode;
pub mod quad;
pub mod report;
pub mod spaces;
pub mod weights;

pub use error::{Error, Result};
pub mod problem;
pub mod extremal;
pub mod constraints;
pub mod sufficiency;
pub mod catalog;
pub mod horizonlab;
pub mod verify;
