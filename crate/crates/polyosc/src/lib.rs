//! IO, file formats, parallel assembly and the verification report for
//! `polyosc-core`.

pub mod assemble;
pub mod config;
pub mod error;
pub mod matrix_io;
pub mod tree_json;
pub mod verify;

pub use error::{CliError, Result};
pub use polyosc_core as core;
