//! Compressive image reconstruction by sparsity averaging reweighted analysis.
//!
//! The crate is organized around the reconstruction pipeline:
//! [`linops`] (wavelet dictionary), [`sensing`] (measurement operators and
//! noise), [`solvers`] (proximal operators and Douglas-Rachford),
//! [`reweight`] (the reweighting driver), [`metrics`], and [`harness`]
//! (configs, image I/O and experiment sweeps).

// Argument checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod linops;
pub mod metrics;
pub mod reweight;
pub mod sensing;
pub mod solvers;

pub use error::{Error, Result};
pub use linops::{BasisId, Dictionary, Image};
pub use num_complex::Complex64;
