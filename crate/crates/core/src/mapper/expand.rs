use super::cascade::cascade_plan;
use super::{GridConfig, MapperError};
use crate::graph::{
    validate, CascadeStage, ControlOp, DataflowGraph, LoadPredicate, NodeId, NodeKind, UnitClass,
};

/// Result of [`expand_comm`]. `overflow` lists original nodes whose
/// communication should be spilled because the expanded graph needs more
/// control/elevator units than the grid has.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub graph: DataflowGraph,
    pub overflow: Vec<NodeId>,
}

/// Rejects bad communication parameters, then any other validation failure.
pub fn check_params(g: &DataflowGraph) -> Result<(), MapperError> {
    let block = g.space.block_size();
    for node in &g.nodes {
        if let Some(comm) = node.kind.comm() {
            if comm.window == 0 || comm.window > block {
                return Err(MapperError::Parameter(format!(
                    "{} has window {}, must be in [1, {block}]",
                    node.id, comm.window
                )));
            }
            comm.shift(&g.space).map_err(|e| MapperError::Parameter(format!("{}: {e}", node.id)))?;
            if comm.offset.is_zero() {
                return Err(MapperError::Parameter(format!("{} has a zero delta", node.id)));
            }
        }
    }
    let report = validate(g);
    if report.is_ok() {
        Ok(())
    } else {
        Err(MapperError::Invalid(report.to_string()))
    }
}

/// Control/elevator units a communication node occupies once expanded.
/// Zero for nodes that are not communication or need no grid unit.
pub fn comm_demand(g: &DataflowGraph, id: NodeId, b: usize) -> usize {
    let node = g.node(id);
    let shift = |comm: &crate::graph::CommPattern| comm.shift(&g.space).map_or(0, |s| s.unsigned_abs() as usize);
    match &node.kind {
        NodeKind::Elevator { comm, stage, .. } if stage.count == 1 => shift(comm).div_ceil(b),
        NodeKind::ELoadStore { comm, spilled: false, .. } => {
            let s = shift(comm);
            if s > b {
                s.div_ceil(b) + 2
            } else {
                0
            }
        }
        _ => 0,
    }
}

fn is_spillable(kind: &NodeKind) -> bool {
    matches!(kind, NodeKind::Elevator { stage, .. } if stage.count == 1)
        || matches!(kind, NodeKind::ELoadStore { spilled: false, .. })
}

/// Replaces long-distance elevators by cascades and long-distance
/// load-or-forward units by a load feeding a multiplexed elevator loop.
pub fn expand_comm(g: &DataflowGraph, grid: &GridConfig) -> Result<Expansion, MapperError> {
    grid.check()?;
    check_params(g)?;
    let b = grid.token_buffer_capacity;

    let mut fixed = 0usize;
    let mut candidates = Vec::new();
    for node in &g.nodes {
        if is_spillable(&node.kind) {
            let d = comm_demand(g, node.id, b);
            if d > 0 {
                candidates.push((d, node.id));
            }
        } else if node.kind.unit_class() == Some(UnitClass::ControlElevator) {
            fixed += 1;
        }
    }
    let mut total = fixed + candidates.iter().map(|(d, _)| d).sum::<usize>();
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut overflow = Vec::new();
    for (d, id) in candidates {
        if total <= grid.control_elevator_units {
            break;
        }
        total -= d;
        overflow.push(id);
    }
    overflow.sort();

    Ok(Expansion { graph: rebuild(g, b), overflow })
}

fn rebuild(g: &DataflowGraph, b: usize) -> DataflowGraph {
    let mut out = DataflowGraph::new(g.space.clone());
    out.arrays = g.arrays.clone();
    let mut entry: Vec<Vec<Vec<(NodeId, usize)>>> = Vec::with_capacity(g.len());
    let mut exit = Vec::with_capacity(g.len());
    for node in &g.nodes {
        let shift = node.kind.comm().and_then(|c| c.shift(&g.space).ok()).unwrap_or(0);
        match &node.kind {
            NodeKind::Elevator { comm, constant, stage } if stage.count == 1 && shift.unsigned_abs() as usize > b => {
                let ids = cascade(&mut out, comm, *constant, node.ty, shift, b);
                entry.push(vec![vec![(ids[0], 0)]]);
                exit.push(*ids.last().expect("nonempty cascade"));
            }
            NodeKind::ELoadStore { array, comm, spilled: false } if shift.unsigned_abs() as usize > b => {
                let load = out.add_node(NodeKind::Load { array: array.clone(), pred: LoadPredicate::SkipIfFalse }, node.ty);
                let mux_a = out.add_node(NodeKind::Control(ControlOp::Merge), node.ty);
                let ids = cascade(&mut out, comm, node.ty.zero(), node.ty, shift, b);
                let mux_b = out.add_node(NodeKind::Control(ControlOp::GateFalse), node.ty);
                out.connect(load, mux_a, 1);
                out.connect(mux_a, ids[0], 0);
                out.connect(*ids.last().expect("nonempty cascade"), mux_b, 1);
                out.connect(mux_b, mux_a, 2);
                entry.push(vec![vec![(load, 0)], vec![(load, 1), (mux_a, 0), (mux_b, 0)]]);
                exit.push(mux_a);
            }
            _ => {
                let id = out.add_node_with_arity(node.kind.clone(), node.ty, node.inputs);
                entry.push((0..node.inputs).map(|p| vec![(id, p)]).collect());
                exit.push(id);
            }
        }
    }
    for e in &g.edges {
        if let Some(targets) = entry.get(e.dst.0).and_then(|ports| ports.get(e.dst_port)) {
            for &(d, p) in targets {
                out.connect(exit[e.src.0], d, p);
            }
        }
    }
    out
}

fn cascade(
    out: &mut DataflowGraph,
    comm: &crate::graph::CommPattern,
    constant: crate::scalar::Scalar,
    ty: crate::scalar::ValueType,
    shift: i64,
    b: usize,
) -> Vec<NodeId> {
    let retags = cascade_plan(shift, b).signed(shift < 0);
    let count = retags.len();
    let ids: Vec<NodeId> = retags
        .iter()
        .enumerate()
        .map(|(index, &retag)| {
            let stage = CascadeStage { index, count, retag };
            out.add_node(NodeKind::Elevator { comm: comm.clone(), constant, stage }, ty)
        })
        .collect();
    for w in ids.windows(2) {
        out.connect(w[0], w[1], 0);
    }
    ids
}

/// Reroutes the given communication nodes through the live value cache.
/// Nodes that are not spillable are left unchanged.
pub fn spill(g: &DataflowGraph, overflow: &[NodeId]) -> DataflowGraph {
    let mut out = g.clone();
    for &id in overflow {
        let node = &mut out.nodes[id.0];
        node.kind = match &node.kind {
            NodeKind::Elevator { comm, constant, stage } if stage.count == 1 => {
                NodeKind::LiveValue { comm: comm.clone(), constant: *constant }
            }
            NodeKind::ELoadStore { array, comm, .. } => {
                NodeKind::ELoadStore { array: array.clone(), comm: comm.clone(), spilled: true }
            }
            other => other.clone(),
        };
    }
    out
}

/// Communication channels served by the live value cache.
pub fn spill_count(g: &DataflowGraph) -> usize {
    g.nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::LiveValue { .. } | NodeKind::ELoadStore { spilled: true, .. }))
        .count()
}
