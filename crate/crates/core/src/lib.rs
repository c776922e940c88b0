//! Exact census of synchronizing colorings of k-out-regular digraphs.

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod canon;
pub mod census;
pub mod digraph;
pub mod enumerate;
pub mod error;
pub mod experiments;
pub mod families;
pub mod runs;
pub mod sync;

pub use digraph::{Automaton, Digraph};
pub use error::{Error, Result};
