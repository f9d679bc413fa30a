//! Sphere-plate Casimir force gradients under competing material models, and
//! the confidence-band method that classifies each model as excluded,
//! consistent, or in agreement with measured gradients.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod dielectric;
pub mod error;
pub mod interp;
pub mod lifshitz;
pub mod quadrature;
pub mod stats;
pub mod units;

pub use error::{Error, Result};
