//! Spin-S Quantum Max-Cut: exact ground energies for small graphs, product
//! states, the two SDP relaxations with Gaussian rounding, the closed-form
//! approximation ratios, and a numerical check of the mediator gadget.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

// `!(x < y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod eigen;
pub mod error;
pub mod exact;
pub mod gadget;
pub mod graph;
pub mod ratios;
pub mod rounding;
pub mod scalar;
pub mod sdp;
pub mod sparse;
pub mod spin;
pub mod verify;

pub use error::{Error, Result};
pub use rounding::Algorithm;
pub use scalar::Real;
pub use spin::SpinValue;

pub type Graph = graph::WeightedGraph<f64>;
pub type Edge = graph::Edge<f64>;
pub type Operator = sparse::SparseOperator<f64>;
pub type State = spin::StateVector<f64>;
pub type Assignment = classical::UnitVectorAssignment<f64>;
pub type Gram = sdp::GramVectors<f64>;
pub type SdpSolution = sdp::SdpSolution<f64>;
pub type RoundingReport = rounding::RoundingReport<f64>;
pub type PipelineResult = rounding::PipelineResult<f64>;
pub type EffectiveHamiltonian = gadget::EffectiveHamiltonian<f64>;
pub type SpectralRow = gadget::SpectralRow<f64>;
pub type RatioTable = ratios::RatioTable<f64>;
