//! Solver core for Bayesian generalized network design.
//!
//! Agents with private, finitely supported request types pick subsets of
//! shared resources; every resource charges a superadditive polynomial of
//! its load and the charge is split equally among its users. The crate
//! computes per-agent strategy lookup tables (type -> action) by simulating
//! approximate-best-response dynamics driven by closed-form estimates of
//! expected cost shares, and ships the exact desk-scale oracles needed to
//! validate each ingredient: Poisson-binomial expectations, Rosenthal-style
//! potentials, smoothness constants, and brute-force optima.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded use. All operations are pure functions over
//! immutable values and are safe to call concurrently.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(missing_debug_implementations)]
#![warn(unused_extern_crates)]

extern crate alloc;

pub mod dynamics;
mod error;
pub mod estimate;
pub mod eval;
pub mod gametheory;
mod math;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
