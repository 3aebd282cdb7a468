//! IO, file formats, and the Monte Carlo experiment driver for the
//! `comp-noma` solver library.

pub mod formats;
pub mod montecarlo;
