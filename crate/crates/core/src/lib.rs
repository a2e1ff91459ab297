//! Quantile control charts for lifetimes following the generalized
//! (exponentiated) Weibull law under Type-I hybrid censoring.
//!
//! The crate covers the distribution itself, the censoring scheme, EM
//! estimation, Fisher information and quantile standard errors, the
//! bootstrap and Shewhart-type chart constructions, and the run-length
//! simulation used to study chart performance.

pub mod censoring;
pub mod charts;
pub mod datasets;
pub mod distribution;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod information;
pub mod quadrature;
mod serde_inf;
pub mod simulation;

pub use censoring::{censor, CensoringKind, CensoringScheme, HybridCensoredSample};
pub use distribution::GwParams;
pub use error::{Error, Result};
pub use estimation::{Estimator, FitConfig, FitResult};
pub use exec::Execution;
