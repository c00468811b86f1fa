//! Polynomial and rational-function algebra in the delay operator `q^-1`.

mod grid;
mod poly;
mod rational;

pub use grid::FreqGrid;
pub use poly::{unit_delay, PolyQ};
pub use rational::{RationalTf, TfOp, STABILITY_MARGIN};
