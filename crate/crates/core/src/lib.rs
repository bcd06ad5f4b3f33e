//! Theil wage-inequality decomposition over quarterly wage panels, and VARX
//! impulse responses of the resulting series to an exogenous policy shock.
//!
//! * [`inequality`]: the Theil index and its within/between decomposition.
//! * [`panel`]: wage and shock ingestion, per-quarter decomposition series,
//!   growth rates.
//! * [`varx`]: least-squares VARX estimation, dynamic multipliers and
//!   residual-bootstrap bands.
//! * [`fixtures`]: synthetic panels with known structure for tests and demos.

pub mod fixtures;
pub mod fmt;
pub mod inequality;
pub mod panel;
pub mod varx;
