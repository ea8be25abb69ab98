#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod error;
pub mod analysis;
pub mod dynamics;
pub mod hilbert;
pub mod measurement;

pub use error::{Error, Result};
