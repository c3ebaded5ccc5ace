//! Interval algebra on the Boolean lattice `P(W)`.
//!
//! Sub-collections of `P(W)` are represented by their maximal closed
//! intervals ([`IntervalCollection`]) or by truth tables ([`BooleanFn`]);
//! the two are converted with [`collection_to_boolean`] and
//! [`boolean_to_collection`]. Subsets of a window are handled internally as
//! `u64` masks in canonical (row-major) point order.

mod boolean;
mod collection;
mod interval;
mod set;
pub mod text;

pub use boolean::{
    boolean_to_collection, collection_to_boolean, dual_boolean, BooleanFn, DEFAULT_TABLE_CAP,
};
pub use collection::{
    collection_complement, collection_inf, collection_sup, maximal_intervals, IntervalCollection,
};
pub use interval::{interval_neighbors, Interval};
pub use set::{set_neighbors, PixelSet, Point, Window, MAX_MASK_POINTS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("point {0} lies outside the window")]
    OutsideWindow(Point),
    #[error("operands are defined over different windows")]
    WindowMismatch,
    #[error("window has {size} points, cap is {cap}")]
    WindowTooLarge { size: usize, cap: usize },
    #[error("invalid interval: left extremity is not contained in right extremity")]
    InvalidInterval,
    #[error("target window is not a superset of the current window")]
    NotSuperset,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
