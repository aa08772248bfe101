//! Pseudospectral simulator and numerical-estimate laboratory for the
//! weakly damped, forced modified KdV equation on the torus.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attractor;
pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod lab;
pub mod profiles;
pub mod symbols;
pub mod torus;

pub use error::{Error, Result};
