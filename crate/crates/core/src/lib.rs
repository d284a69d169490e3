//! Exact computation of recurrence-defined sequences and certificates of
//! log-convexity and log-balancedness.

// failures carry exact witness values
#![allow(clippy::result_large_err)]

pub mod exactmath;
pub mod engine;
pub mod recdsl;
pub mod analysis;
pub mod certify;
pub mod catalog;
pub mod cli;
