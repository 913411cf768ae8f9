// Tensor code indexes several arrays per loop; `!(x > 0.0)` is used on purpose to reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod algebras;
pub mod catalog;
pub mod cli;
pub mod coalgebra;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod extensions;
pub mod geometry;
pub mod verify;

pub use error::{Error, Result};
