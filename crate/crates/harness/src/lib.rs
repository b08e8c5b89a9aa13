//! Experiment harness: deterministic Monte Carlo, exact oracles and verdict reports.

pub mod config;
pub mod experiments;
pub mod mc;
pub mod mechs;
pub mod oracle;
pub mod report;
