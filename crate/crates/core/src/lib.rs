//! Read-channel model and detector design for resistive crossbar memories.
//!
//! A cell of an `m × n` crossbar is read as its own resistance in parallel
//! with the sneak-path network formed by low-resistance cells whose selectors
//! have failed, plus additive Gaussian noise. This crate provides:
//!
//! - [`channel`]: the sneak-path type distribution, equivalent resistances and
//!   the Gaussian-mixture read density;
//! - [`array`]: exact array-level sampling for Monte Carlo ground truth;
//! - [`quantizer`]: mutual-information optimal read quantizers for single and
//!   averaged multiple reads (dynamic programming over a fine grid);
//! - [`threshold`]: the single-bit (threshold) detector designed by bisection
//!   on the derivative of the binary asymmetric channel MI;
//! - [`map`]: the maximum a-posteriori detector and its error probability;
//! - [`ecc`]: binary BCH codes over GF(2^7) and LLR export.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod array;
pub mod channel;
pub mod ecc;
mod error;
pub mod map;
pub mod quantizer;
pub mod special;
pub mod stats;
pub mod threshold;

pub use channel::{ChannelModel, ChannelParams, PathConfig, SneakPathType};
pub use error::{Error, Result};

/// A stored bit. `0` is the high-resistance state, `1` the low-resistance state.
pub type Bit = u8;
