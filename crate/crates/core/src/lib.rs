//! Core algorithms for a news-tone event study pipeline.
//!
//! Everything in this crate is deterministic and allocation-only: no IO, no
//! clocks, no global state, no platform-dependent hashing. The heavy lifting
//! (text normalisation, near-duplicate detection, lexicon calibration, tone
//! aggregation, abnormal-tone event algebra, market microstructure measures
//! and fixed-effects panel regressions) lives here so that the command line
//! crate is little more than parsing and orchestration.
//!
//! The crate is `no_std` (with `alloc`) outside of its own test builds.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod calendar;
pub mod calibrate;
pub mod dedup;
pub mod event;
pub mod lexicon;
pub mod linalg;
pub mod market;
pub mod panel;
pub mod porter;
pub mod stats;
pub mod text;
pub mod tone;
