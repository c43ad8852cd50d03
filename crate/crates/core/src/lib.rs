//! Fourier-collocation solver for one-dimensional vorticity models: the
//! 1D MHD system in Elsässer form, its pure-transport part, and the
//! Okamoto–Sakajo–Wunsch family (CLM and De Gregorio). Around the solver sit
//! diagnostics for blow-up monitoring, particle tracing along
//! characteristics, and the config/CSV layer used by the `vort1d` binary.

// Comparisons written as `!(a > b)` reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod cli_io;
pub mod diagnostics;
pub mod error;
pub mod models;
pub mod spectral;
pub mod studies;
pub mod timestepper;

pub use error::{Error, Result};
