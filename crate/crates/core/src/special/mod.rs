//! Special functions used across the crate.

mod airy;
pub mod ddouble;

pub use airy::{airy_asymptotic, airy_dd, airy_fn, airy_series, Airy, AIRY_DOMAIN, DD_ASYMPTOTIC_MIN, SERIES_LIMIT};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("argument {s} outside the supported range |s| <= {limit}")]
    OutOfRange { s: f64, limit: f64 },
    #[error("argument is not finite")]
    NotFinite,
}
