//! Morphological computational graphs.
//!
//! An [`MCGraph`] is a DAG of computing vertices: one input, one output,
//! W-operators with a single predecessor, and suprema/infima joining two or
//! more. [`validate`] checks the axioms and yields a [`ValidGraph`], the only
//! form that can be evaluated.
//!
//! Besides evaluation on images, a graph can be pushed through the interval
//! algebra: [`window_of`] propagates a window within which the realized
//! operator is locally defined, and [`basis_of`] propagates its basis.
//! [`kernel_by_enumeration`] recovers the kernel by brute force and serves as
//! the reference for both.

mod basis;
mod eval;
mod graph;
pub mod json;
mod random;

pub use basis::{basis_of, basis_with_limits, build_supgen_from_basis, rewindow, BasisLimits};
pub use eval::{evaluate, evaluate_all, kernel_by_enumeration, vertex_windows, window_of};
pub use graph::{validate, Axiom, MCGraph, Operator, StructOp, ValidGraph, VertexKind, Violation};
pub use random::random_graph;

use thiserror::Error;

use crate::lattice::LatticeError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McgError {
    #[error("graph violates the axioms: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("window cap exceeded: window has {size} points, cap is {cap}")]
    WindowCap { size: usize, cap: usize },
    #[error("basis budget exceeded: {intervals} intervals, budget is {budget}")]
    Budget { intervals: usize, budget: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("graph file: {0}")]
    Format(String),
}

impl McgError {
    /// Whether this is a refusal due to a size guard rather than bad input.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            McgError::WindowCap { .. }
                | McgError::Budget { .. }
                | McgError::Lattice(LatticeError::WindowTooLarge { .. })
        )
    }
}
