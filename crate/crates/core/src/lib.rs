//! Photovoltaic generation modelling and forecasting from cloud cover
//! reports.
//!
//! The plant output is described by a PVUSA-type model scaled by a quadratic
//! cloud cover factor. Its parameters are tracked recursively (extended Kalman
//! filter for the physical parameterizations, recursive least squares for the
//! linear-in-parameters form) and used to produce day-ahead and hour-ahead
//! forecasts.

pub mod benchmarks;
pub mod dataset;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod forecast;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod simulator;
pub mod solar;

pub use error::{Error, Result};
