//! Simulation kernels for physical learning machines.
//!
//! The crate models learning hardware as stochastic physics: a bistable
//! activation switch (overdamped double well or its two-state Markov
//! coarse-graining), perceptrons whose weights are updated from sampled
//! switch outputs, continuous-time weight dynamics, the thermodynamic ledger
//! that ties energy and entropy changes to the learning error, limit-cycle
//! spiking neurons and a single-photon kernel estimator.
//!
//! Everything here is `no_std` with `alloc`. Randomness always flows through
//! an explicit [`RngStream`], so every operation is a pure function of its
//! arguments and ensembles can be evaluated in any order (see [`ensemble`]).
#![no_std]
#![warn(missing_debug_implementations)]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod contlearn;
pub mod doublewell;
pub mod ensemble;
mod error;
pub mod numeric;
pub mod observer;
pub mod perceptron;
pub mod qkernel;
mod rng;
pub mod sde;
pub mod spiking;
pub mod stats;
pub mod switch;
pub mod thermo;
mod trajectory;

pub use error::{Error, Result};
pub use rng::{RngStream, StreamSeed};
pub use trajectory::{Channel, Trajectory};
