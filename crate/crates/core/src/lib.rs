//! Linearized optomechanics of a photon Bose-Einstein condensate coupled to a
//! vibrating membrane.
//!
//! Pipeline: [`becmodel`] turns physical inputs into a [`LinearModel`],
//! [`dynamics`] solves for the steady-state covariance, [`spectra`] and
//! [`entanglement`] derive observables, and [`sweep`] / [`cli`] drive grids
//! and produce CSV/JSON artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod becmodel;
pub mod cli;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod spectra;
pub mod sweep;

pub use becmodel::{build_linear_model, LinearModel, PhysicalParams};
pub use error::{Error, Result};
