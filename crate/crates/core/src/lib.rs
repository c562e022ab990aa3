//! High-dimensional tests for mean vectors calibrated by normal-reference
//! (chi-square-type mixture) approximations.
//!
//! The crate is organised bottom-up:
//!
//! - [`matrix`]: data containers and the Gram-matrix trace engine.
//! - [`estimators`]: bias-corrected estimators of trace functionals.
//! - [`chi2mix`]: mixture cumulants, 2-c / 3-c / F-type matching and tail
//!   probabilities.
//! - [`two_sample`] and [`glht`]: the test procedures, each returning a
//!   [`TestReport`].
//! - [`sim`]: Monte Carlo mixture oracle, ICM data generator, empirical-size
//!   studies and estimator audits.
//! - [`io`] and [`cli`]: CSV ingestion and the `hdnr` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chi2mix;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod glht;
pub mod io;
pub mod matrix;
pub mod report;
pub mod sim;
pub mod two_sample;

mod omega;

pub use chi2mix::{ApproxParams, ChiSquareMixture, CumulantTriple};
pub use error::{Error, Result};

pub use matrix::{CenteredFactor, DataMatrix};


pub use report::TestReport;
pub use two_sample::{TwoSampleInput, TwoSampleOptions, TwoSampleTest};
pub use glht::{build_contrast, one_way_contrast, one_way_design, ContrastSpec, DesignSpec, GlhtTest, HMatrix};
