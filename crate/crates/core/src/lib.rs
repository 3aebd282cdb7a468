//! Two-cell CoMP-NOMA downlink power minimization.
//!
//! A pair of multi-antenna base stations jointly serve one cell-edge user
//! (the CoMP user) while each station also serves its own near user on the
//! same resource block.  This crate implements, in closed form, the minimum
//! total transmit power beamformers for the dirty-paper-coding relaxation of
//! that downlink, the quasi-degradation test that decides when superposition
//! coding attains the same minimum, a zero-forcing baseline, greedy user
//! pairing for the multi-group scenario, and an independent brute-force grid
//! oracle used to cross-check the solver.
//!
//! The crate is `no_std` + `alloc`; all IO, file formats, and the Monte Carlo
//! command-line driver live in the companion `comp-noma-sim` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod channel;
pub mod cvec;
pub mod dpc;
pub mod oracle;
pub mod pairing;
pub mod rate;
pub mod schemes;

pub use channel::{ChannelSet, ScenarioConfig};
pub use cvec::Cx;
pub use dpc::{solve_dpc, DpcSolution, SolverCache};
pub use rate::{BeamformerSet, GroupChannels, SinrTargets};
pub use schemes::{h_comp_noma, qd_check, zfbf_solve, SchemeDecision};
