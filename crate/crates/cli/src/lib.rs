//! Batch pipeline: wage panel → inequality decomposition → impulse responses
//! to a policy shock, plus wage growth tables.

pub mod commands;
pub mod config;
pub mod demo;
