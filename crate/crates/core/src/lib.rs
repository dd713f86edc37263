//! Prefix sums with constant-time update and retrieve on a simulated
//! shared-bit memory, and a balanced segment tree for the dynamic and
//! general variants.
//!
//! - [`wordpar`]: packed-lane (SWAR) arithmetic mod `M`.
//! - [`rambo`]: the shared-bit memory whose registers are tree paths.
//! - [`nmtree`]: the prefix-sum tree stored in that memory.
//! - [`binset`]: AVL segment tree over a sparse set of positions.
//! - [`baseline`]: dense-array oracle and Fenwick tree.
//! - [`workload`]: seeded random operation streams.

pub mod baseline;
pub mod binset;
mod error;
pub mod nmtree;
pub mod rambo;
pub mod wordpar;
pub mod workload;

pub use baseline::{FenwickTree, Oracle};
pub use binset::{AddMod, AffineMod, BinSet, First, Max, Semigroup};
pub use error::{Error, Result};
pub use nmtree::{NmTree, SumTable, TreeParams};
pub use rambo::{Counters, YggdrasilMemory};
pub use wordpar::{LaneGeometry, LaneWord};
