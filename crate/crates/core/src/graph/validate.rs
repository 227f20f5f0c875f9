use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use super::{DataflowGraph, NodeId, NodeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    ElevatorArity,
    PortArity,
    DanglingPort,
    MultiplyDrivenPort,
    BadEdge,
    Window,
    Delta,
    CascadeStage,
    UnknownArray,
    UnorderedMemory,
    CombinationalCycle,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::ElevatorArity => "elevator arity",
            ViolationKind::PortArity => "port arity",
            ViolationKind::DanglingPort => "dangling port",
            ViolationKind::MultiplyDrivenPort => "multiply driven port",
            ViolationKind::BadEdge => "bad edge",
            ViolationKind::Window => "window",
            ViolationKind::Delta => "delta",
            ViolationKind::CascadeStage => "cascade stage",
            ViolationKind::UnknownArray => "unknown array",
            ViolationKind::UnorderedMemory => "unordered memory",
            ViolationKind::CombinationalCycle => "combinational cycle",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: Option<NodeId>,
    pub edge: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(n) = self.node {
            write!(f, " at {n}")?;
        }
        if let Some(e) = self.edge {
            write!(f, " (edge {e})")?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, node: Option<NodeId>, edge: Option<usize>, detail: String) {
        self.violations.push(Violation { kind, node, edge, detail });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&lines.join("; "))
    }
}

/// Checks structural well-formedness. Never fails; every problem found is
/// listed in the report.
pub fn validate(graph: &DataflowGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = graph.nodes.len();

    for node in &graph.nodes {
        let expected = node.kind.input_arity();
        if node.inputs != expected {
            let kind = if matches!(node.kind, NodeKind::Elevator { .. }) {
                ViolationKind::ElevatorArity
            } else {
                ViolationKind::PortArity
            };
            report.push(
                kind,
                Some(node.id),
                None,
                format!("{} expects {expected} inputs, declares {}", node.kind.mnemonic(), node.inputs),
            );
        }
        check_node_params(graph, node.id, &mut report);
    }

    let mut drivers: Vec<Vec<usize>> = graph.nodes.iter().map(|nd| vec![0; nd.inputs]).collect();
    for (i, e) in graph.edges.iter().enumerate() {
        if e.src.0 >= n || e.dst.0 >= n {
            report.push(ViolationKind::BadEdge, None, Some(i), "endpoint does not exist".into());
            continue;
        }
        if e.src_port >= graph.nodes[e.src.0].outputs {
            report.push(ViolationKind::BadEdge, Some(e.src), Some(i), format!("no output port {}", e.src_port));
            continue;
        }
        match drivers[e.dst.0].get_mut(e.dst_port) {
            Some(count) => *count += 1,
            None => report.push(
                ViolationKind::BadEdge,
                Some(e.dst),
                Some(i),
                format!("no input port {}", e.dst_port),
            ),
        }
    }
    for (idx, ports) in drivers.iter().enumerate() {
        for (port, &count) in ports.iter().enumerate() {
            if count == 0 {
                report.push(ViolationKind::DanglingPort, Some(NodeId(idx)), None, format!("input port {port} unconnected"));
            } else if count > 1 {
                let kind = if matches!(graph.nodes[idx].kind, NodeKind::Elevator { .. }) {
                    ViolationKind::ElevatorArity
                } else {
                    ViolationKind::MultiplyDrivenPort
                };
                report.push(kind, Some(NodeId(idx)), None, format!("input port {port} has {count} drivers"));
            }
        }
    }

    // The remaining checks walk edges, so only run them on sound edges.
    if report.has(ViolationKind::BadEdge) {
        return report;
    }
    let succ = intra_thread_successors(graph);
    check_cycles(graph, &succ, &mut report);
    check_memory_order(graph, &succ, &mut report);
    report
}

fn check_node_params(graph: &DataflowGraph, id: NodeId, report: &mut ValidationReport) {
    let node = graph.node(id);
    let block = graph.space.block_size();
    if let Some(array) = node.kind.memory_array() {
        if graph.array(array).is_none() {
            report.push(ViolationKind::UnknownArray, Some(id), None, format!("array `{array}` not declared"));
        }
    }
    if let Some(comm) = node.kind.comm() {
        if comm.window < 1 || comm.window > block {
            report.push(
                ViolationKind::Window,
                Some(id),
                None,
                format!("window {} outside [1, {block}]", comm.window),
            );
        }
        match comm.offset.to_linear(&graph.space) {
            Err(e) => report.push(ViolationKind::Delta, Some(id), None, e.to_string()),
            Ok(0) => report.push(ViolationKind::Delta, Some(id), None, "zero delta".into()),
            Ok(_) => {}
        }
    }
    if let NodeKind::Elevator { stage, .. } = &node.kind {
        if stage.count == 0 || stage.index >= stage.count || stage.retag == 0 {
            report.push(
                ViolationKind::CascadeStage,
                Some(id),
                None,
                format!("stage {}/{} retag {}", stage.index, stage.count, stage.retag),
            );
        }
    }
}

fn intra_thread_successors(graph: &DataflowGraph) -> Vec<Vec<usize>> {
    let mut succ = vec![Vec::new(); graph.nodes.len()];
    for e in &graph.edges {
        if !graph.nodes[e.src.0].kind.crosses_threads() {
            succ[e.src.0].push(e.dst.0);
        }
    }
    succ
}

fn check_cycles(graph: &DataflowGraph, succ: &[Vec<usize>], report: &mut ValidationReport) {
    let n = graph.nodes.len();
    let mut indeg = vec![0usize; n];
    for s in succ.iter().flatten() {
        indeg[*s] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = queue.pop_front() {
        seen += 1;
        for &s in &succ[i] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                queue.push_back(s);
            }
        }
    }
    if seen < n {
        let first = (0..n).find(|&i| indeg[i] > 0).expect("cycle member");
        report.push(
            ViolationKind::CombinationalCycle,
            Some(NodeId(first)),
            None,
            format!("{} nodes on cycles not broken by a cross-thread node", n - seen),
        );
    }
}

fn reachable(succ: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut stack = vec![from];
    while let Some(i) = stack.pop() {
        for &s in &succ[i] {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    seen
}

fn check_memory_order(graph: &DataflowGraph, succ: &[Vec<usize>], report: &mut ValidationReport) {
    let mut by_array: BTreeMap<&str, Vec<(usize, bool)>> = BTreeMap::new();
    for node in &graph.nodes {
        if let Some(array) = node.kind.memory_array() {
            let is_store = matches!(node.kind, NodeKind::Store { .. });
            by_array.entry(array).or_default().push((node.id.0, is_store));
        }
    }
    for (array, ops) in by_array {
        if !ops.iter().any(|&(_, st)| st) {
            continue;
        }
        let reach: Vec<Vec<bool>> = ops.iter().map(|&(i, _)| reachable(succ, i)).collect();
        for a in 0..ops.len() {
            for b in a + 1..ops.len() {
                let (ia, sa) = ops[a];
                let (ib, sb) = ops[b];
                if !(sa || sb) {
                    continue;
                }
                if !reach[a][ib] && !reach[b][ia] {
                    report.push(
                        ViolationKind::UnorderedMemory,
                        Some(NodeId(ib)),
                        None,
                        format!("n{ia} and n{ib} access `{array}` without an ordering path"),
                    );
                }
            }
        }
    }
}
