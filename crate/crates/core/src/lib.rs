//! Interbank exposure networks: construction from transaction logs,
//! structural statistics, calibrated synthetic generation, and
//! default-cascade simulation over stylized balance sheets.
//!
//! The crate is organized around one central type, [`graph::InterbankNetwork`],
//! a directed weighted graph in which an edge runs from a borrower to a
//! lender and carries the total obligation between the pair for one day.
//! Everything else consumes networks:
//!
//! - [`ingest`] parses transaction logs, slices them into daily networks,
//!   and round-trips networks through an edge-list CSV format;
//! - [`metrics`] computes link probability, clustering, degree histograms,
//!   tail-exponent fits, second-neighbor counts, degree correlations,
//!   activity decomposition, and weight concentration;
//! - [`synth`] generates random directed scale-free networks from a
//!   zero-inflated power-law degree model (directed configuration model);
//! - [`contagion`] builds per-bank balance sheets and runs seeded default
//!   cascades and capital-buffer sweeps;
//! - [`report`] renders machine- and human-readable outputs.

pub mod contagion;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod money;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{BankId, DayLabel, DegreeRecord, InterbankNetwork, Transaction};
pub use money::Money;

/// Exact rational used for balance-sheet arithmetic and model parameters.
///
/// Cascade boundary conditions (a surplus of exactly zero counts as a
/// default) must not depend on floating-point rounding, so parameters are
/// parsed from decimal strings into rationals and all solvency arithmetic
/// stays in `Rational` until reporting.
pub type Rational = num_rational::Ratio<i128>;
