//! Channel deficiency, unique information and bottleneck curves on finite
//! alphabets.
//!
//! All information quantities are in bits.

pub mod bottleneck;
pub mod decision;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod instance;
pub mod pid;
pub mod prob;
pub mod projection;
pub mod simplex;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use exec::Exec;
pub use prob::{compose, Axis, Channel, Joint2, Joint3, ProbVector};
