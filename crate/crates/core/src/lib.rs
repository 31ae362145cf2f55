//! Phase-space quantum mechanics of a free particle confined by an infinite
//! wall at `x = 0`, in units `hbar = 2m = 1`.
//!
//! The crate evaluates Wigner functions of confined states and checks them
//! against two phase-space formulations of the wall: star-genvalue equations
//! with a one-sided `delta'` potential ([`startools`], [`dp`]) and a fourth-order
//! equation in `x` with boundary and pure-state filters ([`kw`]). A smooth
//! exponential barrier ([`wall`]) approaches the hard wall as its steepness
//! grows, and [`dynamics`] checks the transport equation with its wall source.
//!
//! Everything lives on a uniform [`PhaseGrid`] that always carries a node at
//! the wall. Fields are stored as complex numbers; real-valuedness is checked.

pub mod calculus;
pub mod dp;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod grid;
pub mod io;
pub mod kw;
pub mod report;
pub mod special;
pub mod startools;
pub mod tolerance;
pub mod wall;
pub mod wave;

pub use error::{Error, Result};
pub use grid::{DistributionalValue, PhaseFunction, PhaseGrid, SpectralSlice, C64};
pub use report::ResidualReport;
pub use wave::{WaveFunction, WaveKind};
