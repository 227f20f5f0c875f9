//! Maps a dataflow graph onto the grid: cascade and window planning,
//! communication expansion, live value cache spilling, placement and
//! routing.

mod cascade;
mod expand;
mod grid;
mod place;

use thiserror::Error;

pub use cascade::{cascade_plan, partition_windows, CascadePlan};
pub use expand::{check_params, comm_demand, expand_comm, spill, spill_count, Expansion};
pub use grid::{GridConfig, Unit};
pub use place::{place_and_route, Mapping, Route};

use crate::graph::{DataflowGraph, UnitClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapperError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("capacity error: graph needs {needed} {} units, grid has {available}", class.name())]
    Capacity { class: UnitClass, needed: usize, available: usize },
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("config error: {0}")]
    Config(String),
}

/// A graph ready to simulate: expanded, spilled if needed, and placed.
#[derive(Clone, Debug)]
pub struct Mapped {
    pub graph: DataflowGraph,
    pub mapping: Mapping,
    pub spills: usize,
}

/// Runs expansion, spills overflowing communication to the live value
/// cache when the control/elevator inventory is short, then places.
pub fn map(g: &DataflowGraph, grid: &GridConfig) -> Result<Mapped, MapperError> {
    let first = expand_comm(g, grid)?;
    let graph = if first.overflow.is_empty() {
        first.graph
    } else {
        let spilled = spill(g, &first.overflow);
        expand_comm(&spilled, grid)?.graph
    };
    let mapping = place_and_route(&graph, grid)?;
    let spills = spill_count(&graph);
    Ok(Mapped { graph, mapping, spills })
}
