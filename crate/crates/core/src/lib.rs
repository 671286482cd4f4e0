#![no_std]
extern crate alloc;

pub mod bases;
pub mod cg;
pub mod error;
pub mod quad;
pub mod special;
pub mod transition;
pub mod tree;

pub use error::{Error, Result};
