//! Numerical core for stochastic 2D metamaterial structure-property linkages.
//!
//! Everything here is pure computation over in-memory data and only needs
//! `alloc`: periodic unit-cell generation and analysis ([`geometry`]),
//! Galerkin-FFT homogenization of the effective stiffness under infinite
//! contrast ([`homogenize`]), periodic 2-point statistics and PCA
//! ([`statistics`]), exact Gaussian process regression ([`gpr`]) and
//! pool-based uncertainty-sampling active learning ([`active`]).
//!
//! File formats, the command line and plotting live in the `metamat` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod active;
pub mod error;
pub mod fft;
pub mod geometry;
pub mod gpr;
pub mod homogenize;
pub mod linalg;
pub mod seed;
pub mod statistics;

pub use error::{Error, Result};
