//! Bell inequalities in Collins–Gisin form, their equivalence and inclusion
//! structure, and numerical thresholds of isotropic states against them.

pub mod analytic;
pub mod catalog;
pub mod error;
pub mod inequality;
pub mod linalg;
pub mod quantum;
pub mod seesaw;
pub mod threshold;

pub use error::{Error, Result};
pub use inequality::{BellInequality, Party, Transform};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
