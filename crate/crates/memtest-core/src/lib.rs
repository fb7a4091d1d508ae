//! Memory-bounded uniformity testing toolkit.
//!
//! Builds finite-state machines that test whether an i.i.d. symbol stream
//! comes from the uniform distribution over `[n]` or from a distribution
//! far from uniform in total variation, analyzes the Markov chains those
//! machines induce (absorption, stationary distributions, time-averaged
//! error), and synthesizes far-from-uniform distributions that a given
//! small machine provably cannot tell apart from uniform.
//!
//! The crate is `no_std` (alloc required); IO, file formats and the CLI
//! live in the companion `memtest-cli` crate.
//!
//! State and symbol indices are 0-based throughout this crate. The file
//! formats written by the CLI are 1-based.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod constructions;
pub mod dist;
pub(crate) mod graph;
pub mod linalg;
pub mod machine;
pub mod markov;
pub(crate) mod math;
pub mod rng;
pub mod sim;
pub mod sparse;
pub mod verify;

pub use dist::DiscreteDistribution;
pub use machine::{Decision, Machine, RunTrace};
pub use markov::{ChainAnalysis, TransitionMatrix};
