#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coherent;
pub mod error;
pub mod intelligent;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
