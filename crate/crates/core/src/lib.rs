//! Legendre-family uniformization, isogeny detection, canonical heights and
//! bounded integer-relation search on products of Legendre elliptic curves.

pub mod analytic;
pub mod error;
pub mod heights;
pub mod isogeny;
pub mod legendre;
pub mod lll;
pub mod precision;
pub mod relation;
pub mod search;

pub use error::{Error, Result};
pub use precision::PrecisionContext;
