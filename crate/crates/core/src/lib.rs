//! Hourly simulation and multi-criteria assessment of grid-connected
//! hydrogen production sites.

pub mod dispatch;
pub mod error;
pub mod kpi;
pub mod market;
pub mod mcdm;
pub mod site;
pub mod study;

pub use error::{Error, Result};
