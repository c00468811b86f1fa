//! Identification of a single module embedded in a dynamic LTI network.
//!
//! The network obeys `w = G(q) w + r + v`. Two estimators of one edge
//! `G_{ji}` are provided: the direct prediction-error method on node `j`'s
//! equation ([`direct`]), and the local method ([`local`]) that identifies a
//! small block of `T = (I - G)^{-1}` in open loop and recovers the module
//! with a per-frequency linear solve.
//!
//! All numerical code is generic over [`Real`]; the `*64` aliases fix the
//! scalar to `f64`.

pub mod direct;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod local;
pub mod network;
pub mod scalar;
pub mod tf;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type PolyQ64 = tf::PolyQ<f64>;
pub type RationalTf64 = tf::RationalTf<f64>;
pub type FreqGrid64 = tf::FreqGrid<f64>;
pub type NetworkModel64 = network::NetworkModel<f64>;
pub type SignalRecord64 = network::SignalRecord<f64>;
pub type FreqResponseMatrix64 = network::FreqResponseMatrix<f64>;
pub type DirectEstimate64 = direct::DirectEstimate<f64>;
pub type TSubmatrixEstimate64 = local::TSubmatrixEstimate<f64>;
pub type ModuleEstimate64 = local::ModuleEstimate<f64>;

pub type RationalTf32 = tf::RationalTf<f32>;
pub type NetworkModel32 = network::NetworkModel<f32>;
