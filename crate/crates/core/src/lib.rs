//! Topological navigation engine and 2D gridworld simulator.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gridworld;
pub mod maintenance;
pub mod navharness;
pub mod perception;
pub mod se2;
pub mod topograph;

pub use error::{Error, Result};
