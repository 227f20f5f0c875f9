//! Compiler and cycle-level simulator for a massively multithreaded
//! coarse-grained reconfigurable array with direct inter-thread
//! communication.
//!
//! The pipeline is: [`frontend::parse`] a kernel, [`frontend::lower`] it to a
//! [`graph::DataflowGraph`], expand and place it with [`mapper`], then run it
//! with [`sim::simulate`]. [`pipeline::run`] strings the stages together and
//! [`bench`] holds the benchmark kernels with their reference oracles.

pub mod bench;
pub mod frontend;
pub mod graph;
pub mod mapper;
pub mod memsys;
pub mod pipeline;
pub mod scalar;
pub mod sim;
pub mod stats;

pub use scalar::{Scalar, ValueType};

/// Contents of the global arrays, keyed by name, row-major.
pub type ArrayData = std::collections::BTreeMap<String, Vec<Scalar>>;
