//! Exact simulation of weak-disorder first-passage percolation on the
//! complete graph with i.i.d. edge weights `E^s`, together with the
//! continuous-time branching process (CTBP) that describes its local
//! growth and the closed-form limit laws for the optimal-path weight
//! and hopcount.
//!
//! Module map:
//! - [`limits`]: analytic constants (Malthusian rate, stable-age law,
//!   convolution densities) — everything computable without randomness.
//! - [`sampling`]: reproducible random primitives (split-stream RNG,
//!   offspring point process, residual edge laws, hazard inversion).
//! - [`ctbp`]: event-driven branching-process simulation with
//!   characteristic accumulators.
//! - [`fpp`]: the two-source flow race on `K_n` plus a brute-force
//!   Dijkstra oracle.
//! - [`limitlaw`]: samplers/solvers for the limit objects (martingale
//!   limit `W`, its Laplace transform, the recentered-weight limit).
//! - [`stats`]: estimators and hypothesis tests for the harness.
//! - [`verify`]: the canned verification suites.

pub mod ctbp;
pub mod fpp;
pub mod limitlaw;
pub mod limits;
pub mod quad;
pub mod sampling;
pub mod stats;
pub mod verify;

pub use limits::{Disorder, LimitConstants};
