#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Trapping of null geodesics, Morawetz multipliers and wave evolution on
//! Tangherlini and small-rotation Myers-Perry black holes.

pub mod error;
pub mod geodesic;
pub mod geometry;
pub mod harness;
pub mod numerics;
pub mod schw_multiplier;
pub mod sos;
pub mod trapping;
pub mod wavesolver;

pub use error::{Error, Result};
