#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod error;
pub mod matrix;

pub use error::{Error, Result};
pub use matrix::Mat;
pub mod special;
pub mod lti;
pub mod rng;
pub mod sim;
pub mod hrisk;
pub mod calibration;
pub mod stats;
pub mod sweep;
