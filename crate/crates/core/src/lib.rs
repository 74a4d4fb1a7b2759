//! Regression discontinuity estimation that stays valid when units can
//! manipulate the running variable.
//!
//! One-sided local polynomial fits give boundary means and densities
//! ([`localfit`], [`boundary`]); the density ratio at the cutoff drives
//! partial-identification bounds on the effect for non-manipulators
//! ([`bounds`]). [`diagnostics`] runs density and covariate-balance tests,
//! [`inference`] bootstraps the bound endpoints and builds Imbens–Manski
//! intervals, and [`synth`] generates designs with known answers. The
//! `rdd-bounds` binary wraps all of it ([`cli`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod bounds;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod inference;
pub mod localfit;
pub mod resample;
pub mod synth;

pub use error::{Error, Result};
