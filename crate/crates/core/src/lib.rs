#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod eigen;
pub mod error;
pub mod field;
pub mod gauge;
pub mod io;
pub mod pucci;
pub mod sim;
pub mod verify;

pub use config::SimConfig;
pub use error::{Error, Result, Stage};
