//! Hybrid data/physics pipeline for permanent-magnet synchronous machine
//! performance analysis.
//!
//! * [`machine`] — analytical dq forward model producing per-operating-point
//!   intermediate measures (torque and flux waveforms, iron-loss energies).
//! * [`dataset`] — Latin-hypercube design sampling, operating-point grid,
//!   generation, splits and the binary dataset format.
//! * [`nn`] — multi-branch feed-forward surrogate and the direct-KPI
//!   baseline, with reverse-mode gradients, optimizers and early stopping.
//! * [`post`] — physics post-processing: dq maps, limit curve,
//!   characteristic curves, efficiency maps and KPIs.
//! * [`eval`] — error metrics and the hybrid-vs-direct comparison harness.
//! * [`cli`] — batch command-line surface.

pub mod cli;
pub mod container;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod machine;
pub mod nn;
pub mod plot;
pub mod post;

pub use error::{Error, Result};
