//! Monte Carlo link-level simulator and goal-oriented resource allocation for a
//! goal-oriented (GO) edge-inference uplink that fully shares its spectrum with a
//! data-oriented (DO) uplink.
//!
//! The crate is layered bottom-up:
//!
//! * [`rf`] draws Rician SIMO channels, applies MRC combining and evaluates SINR,
//!   finite-blocklength rate and transmission delay.
//! * [`compute`] samples edge-server computation delays.
//! * [`goal`] turns realized packet errors into a goal value (NREI) through a
//!   pluggable entropy oracle and scores goal success, effectiveness and cost.
//! * [`optimizer`] holds the virtual queue, the success-probability lookup table
//!   and the per-slot drift-plus-penalty solver.
//! * [`sim`] runs adaptive controllers, fixed-decision grid sweeps and the
//!   bandwidth-splitting baseline.
//! * [`config`], [`presets`], [`output`] and [`cli`] handle configuration files,
//!   experiment presets, CSV emission and the command line.

pub mod cli;
pub mod compute;
pub mod config;
pub mod error;
pub mod goal;
pub mod optimizer;
pub mod output;
pub mod presets;
pub mod rf;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
