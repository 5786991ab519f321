//! Privacy auditing for tabular synthetic data.
//!
//! The crate is organized around a single question: does a synthetic dataset
//! (or the generative pipeline behind it) leak information about the records
//! it was trained on?
//!
//! - [`data`] — mixed-type tabular data model, deterministic randomness,
//!   Gower-style distances, and CSV/JSON I/O.
//! - [`sbpm`] — the three similarity-based privacy metrics (identical match
//!   share, distance to closest record, nearest-neighbor distance ratio),
//!   their pass/fail tests, and the vendor-style metrics oracle.
//! - [`generators`] — marginal samplers (non-private and Laplace-noised with
//!   a privacy accountant) plus deliberately leaky generators used as audit
//!   fixtures.
//! - [`attacks`] — the motivated-intruder suite: differencing probe with an
//!   empirical-epsilon lower bound, shadow-model membership inference,
//!   nearest-neighbor attribute inference, and reconstruction through the
//!   metrics oracle.
//! - [`audit`] — orchestrates generation, metrics, and attacks into one run
//!   and maps outcomes onto the three identifiability risks (singling out,
//!   linkability, inference) plus an overall reconstruction verdict.
//! - [`scenarios`] — pinned worst-case fixtures used by the CLI `basecase`
//!   command and the acceptance suite.

pub mod attacks;
pub mod audit;
pub mod data;
pub mod generators;
pub mod sbpm;
pub mod scenarios;
