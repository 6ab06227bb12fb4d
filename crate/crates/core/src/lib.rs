//! Fixed-point and double-precision conjugate gradient solvers for the 2D
//! Poisson problem on a streaming, superscalar dataflow model, together with
//! an analytical latency and resource model of that hardware.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod fixed;
mod math;
pub mod scalar;
pub mod solvers;

pub mod dataflow;
pub mod laplacian;
pub mod perfmodel;

pub use math::ceil_log2;
