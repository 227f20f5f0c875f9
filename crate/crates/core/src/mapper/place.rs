use std::fmt::Write as _;

use super::grid::Unit;
use super::{GridConfig, MapperError};
use crate::graph::{DataflowGraph, NodeId, NodeKind, UnitClass};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Route {
    /// Index into the graph's edge list.
    pub edge: usize,
    /// Grid coordinates visited, both endpoints included; empty when an
    /// endpoint is not placed on a unit.
    pub path: Vec<(usize, usize)>,
    pub hops: usize,
    pub latency: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mapping {
    pub units: Vec<Unit>,
    pub columns: usize,
    /// Unit index per graph node; `None` for sources and spilled channels.
    pub assignment: Vec<Option<usize>>,
    pub routes: Vec<Route>,
    pub spilled: Vec<NodeId>,
}

impl Mapping {
    pub fn unit_of(&self, node: NodeId) -> Option<&Unit> {
        self.assignment.get(node.0).copied().flatten().map(|u| &self.units[u])
    }

    pub fn used(&self, class: UnitClass) -> usize {
        self.assignment.iter().flatten().filter(|&&u| self.units[u].class == class).count()
    }

    /// Checks that no unit hosts two nodes, classes match and every route
    /// joins its endpoints' units.
    pub fn check(&self, g: &DataflowGraph) -> Result<(), String> {
        let mut host = vec![None; self.units.len()];
        for node in &g.nodes {
            let unit = self.assignment[node.id.0];
            match (node.kind.unit_class(), unit) {
                (Some(class), Some(u)) => {
                    if self.units[u].class != class {
                        return Err(format!("{} ({}) sits on a {} unit", node.id, class.name(), self.units[u].class.name()));
                    }
                    if let Some(other) = host[u].replace(node.id) {
                        return Err(format!("unit {u} hosts {other} and {}", node.id));
                    }
                }
                (None, None) => {}
                (Some(_), None) if self.spilled.contains(&node.id) => {}
                _ => return Err(format!("{} has an inconsistent assignment", node.id)),
            }
        }
        if self.routes.len() != g.edges.len() {
            return Err("not every edge is routed".into());
        }
        for r in &self.routes {
            let e = g.edges[r.edge];
            if let (Some(a), Some(b)) = (self.unit_of(e.src), self.unit_of(e.dst)) {
                if r.path.first() != Some(&(a.x, a.y)) || r.path.last() != Some(&(b.x, b.y)) {
                    return Err(format!("route {} does not join its endpoints", r.edge));
                }
            }
        }
        Ok(())
    }

    /// Deterministic textual dump.
    pub fn to_text(&self, g: &DataflowGraph) -> String {
        let mut s = String::new();
        let rows = self.units.len().div_ceil(self.columns.max(1));
        let _ = writeln!(s, "grid {}x{} units={}", self.columns, rows, self.units.len());
        for node in &g.nodes {
            match self.unit_of(node.id) {
                Some(u) => {
                    let _ = writeln!(
                        s,
                        "place {} {} -> u{} {} ({},{})",
                        node.id,
                        node.kind.mnemonic(),
                        u.index,
                        u.class.name(),
                        u.x,
                        u.y
                    );
                }
                None if self.spilled.contains(&node.id) => {
                    let _ = writeln!(s, "spill {} {} -> lvc", node.id, node.kind.mnemonic());
                }
                None => {
                    let _ = writeln!(s, "unplaced {} {}", node.id, node.kind.mnemonic());
                }
            }
        }
        for r in &self.routes {
            let e = g.edges[r.edge];
            let path: String = r.path.iter().map(|(x, y)| format!("({x},{y})")).collect();
            let _ = writeln!(
                s,
                "route {}.{} -> {}.{} hops={} latency={} path={}",
                e.src, e.src_port, e.dst, e.dst_port, r.hops, r.latency, path
            );
        }
        s
    }
}

/// Places every unit-bound node of an expanded graph and routes all edges.
///
/// Nodes are visited in topological order; each takes the free unit of its
/// class closest to the centroid of its already placed producers, lowest
/// index on ties. Routes are dimension-ordered (X then Y).
pub fn place_and_route(g: &DataflowGraph, grid: &GridConfig) -> Result<Mapping, MapperError> {
    grid.check()?;
    let b = grid.token_buffer_capacity as u64;
    for node in &g.nodes {
        let too_far = match &node.kind {
            NodeKind::Elevator { stage, .. } => stage.retag.unsigned_abs() > b,
            NodeKind::ELoadStore { comm, spilled: false, .. } => {
                comm.shift(&g.space).map_err(|e| MapperError::Parameter(e.to_string()))?.unsigned_abs() > b
            }
            _ => false,
        };
        if too_far {
            return Err(MapperError::Parameter(format!(
                "{} moves tokens farther than the buffer capacity {b}; expand communication first",
                node.id
            )));
        }
    }
    let counts = g.class_counts();
    for class in UnitClass::ALL {
        let needed = counts.get(&class).copied().unwrap_or(0);
        if needed > grid.count(class) {
            return Err(MapperError::Capacity { class, needed, available: grid.count(class) });
        }
    }

    let units = grid.layout();
    let mut free = vec![true; units.len()];
    let mut assignment = vec![None; g.len()];
    let sources = g.input_sources();
    for id in g.topo_order() {
        let Some(class) = g.node(id).kind.unit_class() else { continue };
        let placed: Vec<&Unit> = sources[id.0].iter().flatten().filter_map(|p| assignment[p.0].map(|u: usize| &units[u])).collect();
        let centroid = (!placed.is_empty()).then(|| {
            let n = placed.len() as f64;
            (placed.iter().map(|u| u.x as f64).sum::<f64>() / n, placed.iter().map(|u| u.y as f64).sum::<f64>() / n)
        });
        let mut best: Option<(usize, f64)> = None;
        for u in units.iter().filter(|u| u.class == class && free[u.index]) {
            let d = centroid.map_or(0.0, |(cx, cy)| (u.x as f64 - cx).abs() + (u.y as f64 - cy).abs());
            if best.is_none_or(|(_, bd)| d < bd - 1e-9) {
                best = Some((u.index, d));
            }
        }
        let (u, _) = best.expect("capacity checked");
        free[u] = false;
        assignment[id.0] = Some(u);
    }

    let routes = g
        .edges
        .iter()
        .enumerate()
        .map(|(k, e)| match (assignment[e.src.0], assignment[e.dst.0]) {
            (Some(a), Some(b)) => {
                let path = xy_path(&units[a], &units[b]);
                let hops = path.len() - 1;
                Route { edge: k, path, hops, latency: hops as u64 * grid.noc_hop_latency }
            }
            _ => Route { edge: k, path: Vec::new(), hops: 0, latency: 1 },
        })
        .collect();
    let spilled = g
        .nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::LiveValue { .. } | NodeKind::ELoadStore { spilled: true, .. }))
        .map(|n| n.id)
        .collect();
    Ok(Mapping { units, columns: grid.columns, assignment, routes, spilled })
}

fn xy_path(a: &Unit, b: &Unit) -> Vec<(usize, usize)> {
    let mut path = vec![(a.x, a.y)];
    let (mut x, mut y) = (a.x, a.y);
    while x != b.x {
        x = if b.x > x { x + 1 } else { x - 1 };
        path.push((x, y));
    }
    while y != b.y {
        y = if b.y > y { y + 1 } else { y - 1 };
        path.push((x, y));
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{lower, parse};
    use crate::graph::{CascadeStage, CommPattern, ThreadSpace, TidDelta};
    use crate::scalar::{Scalar, ValueType};

    fn prefix_sum() -> DataflowGraph {
        let src = "global int in[64]; global int out[64]; kernel p {
            sum = in[threadIdx.x] + fromThreadOrConst<sum, -1, 0>();
            tagValue<sum>();
            out[threadIdx.x] = sum;
        }";
        lower(&parse(src).unwrap(), &ThreadSpace::linear(64)).unwrap()
    }

    #[test]
    fn prefix_sum_places_everything() {
        let g = prefix_sum();
        let m = place_and_route(&g, &GridConfig::default()).unwrap();
        m.check(&g).unwrap();
        assert_eq!(m.used(UnitClass::ControlElevator), 1);
        for node in &g.nodes {
            assert_eq!(m.unit_of(node.id).is_some(), node.kind.unit_class().is_some());
        }
        for r in m.routes.iter().filter(|r| !r.path.is_empty()) {
            assert_eq!(r.latency, r.hops as u64);
        }
    }

    #[test]
    fn deterministic() {
        let g = prefix_sum();
        let a = place_and_route(&g, &GridConfig::default()).unwrap();
        let b = place_and_route(&g, &GridConfig::default()).unwrap();
        assert_eq!(a.to_text(&g), b.to_text(&g));
    }

    #[test]
    fn too_many_elevators() {
        let mut g = DataflowGraph::new(ThreadSpace::linear(8));
        let t = g.add_node(NodeKind::TidSource(0), ValueType::Int);
        let mut prev = t;
        for _ in 0..17 {
            let e = g.add_node(
                NodeKind::Elevator {
                    comm: CommPattern::new(TidDelta::linear(-1), 8),
                    constant: Scalar::Int(0),
                    stage: CascadeStage::whole(1),
                },
                ValueType::Int,
            );
            g.connect(prev, e, 0);
            prev = e;
        }
        let err = place_and_route(&g, &GridConfig::default()).unwrap_err();
        assert!(matches!(err, MapperError::Capacity { class: UnitClass::ControlElevator, needed: 17, available: 16 }));
        assert!(err.to_string().contains("control_elevator"));
    }

    #[test]
    fn empty_graph() {
        let g = DataflowGraph::new(ThreadSpace::linear(4));
        let m = place_and_route(&g, &GridConfig::default()).unwrap();
        assert!(m.assignment.is_empty() && m.routes.is_empty());
    }
}
