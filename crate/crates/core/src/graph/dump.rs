use std::fmt::Write;

use super::{DataflowGraph, LoadPredicate, Node, NodeKind};

fn params(node: &Node) -> String {
    match &node.kind {
        NodeKind::Load { array, pred } => {
            let p = match pred {
                LoadPredicate::None => "none",
                LoadPredicate::ZeroIfFalse => "zero",
                LoadPredicate::SkipIfFalse => "skip",
            };
            format!(" array={array} pred={p}")
        }
        NodeKind::Store { array, predicated } => format!(" array={array} pred={}", *predicated as u8),
        NodeKind::ELoadStore { array, comm, spilled } => format!(
            " array={array} delta={} win={} spilled={}",
            comm.offset, comm.window, *spilled as u8
        ),
        NodeKind::Elevator { comm, constant, stage } => format!(
            " delta={} win={} const={constant} stage={}/{} retag={}",
            comm.offset, comm.window, stage.index, stage.count, stage.retag
        ),
        NodeKind::LiveValue { comm, constant } => {
            format!(" delta={} win={} const={constant}", comm.offset, comm.window)
        }
        NodeKind::ConstSource(v) => format!(" value={v}"),
        NodeKind::TidSource(d) => format!(" dim={d}"),
        _ => String::new(),
    }
}

/// Deterministic line-oriented listing: header, one line per node, one per edge.
pub fn to_text(graph: &DataflowGraph) -> String {
    let mut out = String::new();
    writeln!(out, "space {}", graph.space).unwrap();
    for a in &graph.arrays {
        let dims: Vec<String> = a.dims.iter().map(|d| d.to_string()).collect();
        writeln!(out, "array {} {} {}", a.name, a.ty, dims.join("x")).unwrap();
    }
    for node in &graph.nodes {
        writeln!(
            out,
            "node {} {} ty={} in={}{}",
            node.id.0,
            node.kind.mnemonic(),
            node.ty,
            node.inputs,
            params(node)
        )
        .unwrap();
    }
    for e in &graph.edges {
        writeln!(out, "edge {}.{} -> {}.{}", e.src.0, e.src_port, e.dst.0, e.dst_port).unwrap();
    }
    out
}

/// Graphviz export. Cross-thread edges are dashed.
pub fn to_dot(graph: &DataflowGraph) -> String {
    let mut out = String::from("digraph kernel {\n  node [shape=box, fontname=monospace];\n");
    for node in &graph.nodes {
        let label = format!("{} {}{}", node.id, node.kind.mnemonic(), params(node)).replace('"', "'");
        let shape = match node.kind {
            NodeKind::Elevator { .. } | NodeKind::LiveValue { .. } => "diamond",
            NodeKind::ELoadStore { .. } | NodeKind::Load { .. } | NodeKind::Store { .. } => "box3d",
            NodeKind::ConstSource(_) | NodeKind::TidSource(_) => "ellipse",
            _ => "box",
        };
        writeln!(out, "  {} [label=\"{label}\", shape={shape}];", node.id).unwrap();
    }
    for e in &graph.edges {
        let style = if graph.nodes[e.src.0].kind.crosses_threads() { "dashed" } else { "solid" };
        writeln!(out, "  {} -> {} [headlabel=\"{}\", style={style}];", e.src, e.dst, e.dst_port).unwrap();
    }
    out.push_str("}\n");
    out
}
