//! Dynamic connectivity of slotted-ALOHA ad hoc networks under the protocol
//! model.
//!
//! Nodes form a homogeneous Poisson point process in a square window. In every
//! slot each node independently transmits with probability `p`; a transmitter
//! `x` reaches a receiver `y` when `|x - y| < eta` and the open disc
//! `B(y, beta |x - y|)` holds no other transmitter. Stacking those per-slot
//! snapshot graphs gives a multigraph whose causal (slot-increasing) paths
//! model store-and-forward delivery.
//!
//! The crate is `no_std` (it needs `alloc`). Parallel replication, file
//! formats and the command-line driver live in the `aloha-sim` crate.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytics;
pub mod config;
pub mod dynamic;
pub mod estimators;
pub mod fit;
pub mod geometry;
pub mod grid;
pub mod percolation;
pub mod pointprocess;
pub mod protocol;
pub mod quadrature;
pub mod stats;
pub mod stream;

pub use analytics::{AnalyticsError, MeanTime};
pub use config::{Boundary, ConfigError, NetworkConfig};
pub use dynamic::{DelayRecord, PropagationFront};
pub use estimators::{ConnectTimeEstimate, DegreeStats};
pub use fit::{FitError, TimeConstantFit};
pub use geometry::{Metric, Point};
pub use percolation::{ComponentLabels, GiantComponent};
pub use pointprocess::{PointSet, PointSetError};
pub use protocol::{SlotState, SnapshotGraph};
pub use stream::{replication_stream, Stream};
