//! Discrete morphological neural networks.
//!
//! Binary-image W-operators are built as morphological computational graphs
//! ([`mcg`]), parameterized by structuring elements and intervals
//! ([`architecture`]), and trained by greedy or stochastic descent over the
//! parameter lattice ([`training`]). [`lattice`] holds the interval algebra
//! used for basis computations, [`morphology`] the image operators, and
//! [`dataset`] image I/O and a synthetic corpus generator.

pub mod lattice;
pub mod morphology;
pub mod mcg;
pub mod architecture;
pub mod training;
pub mod dataset;
