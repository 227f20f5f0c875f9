use crate::graph::{ArithOp, ControlOp, DataflowGraph, FloatOp, LoadPredicate, NodeKind, SpecialOp, ThreadSpace};
use crate::mapper::{place_and_route, GridConfig};
use crate::scalar::{Scalar, ValueType};
use crate::sim::{simulate, SimOptions};
use crate::ArrayData;

use super::BenchError;

/// A communication-free graph with exactly one node per grid unit, so
/// every unit fires once per thread. Needs at least one ALU and FPU and
/// two LDST units. Returns the graph and its inputs (`in[t] = t`).
pub fn saturating_graph(grid: &GridConfig, threads: usize) -> (DataflowGraph, ArrayData) {
    assert!(grid.alus >= 1 && grid.fpus >= 1 && grid.ldst_units >= 2, "grid too small for the synthetic kernel");
    let mut g = DataflowGraph::new(ThreadSpace::linear(threads));
    g.declare_array("in", ValueType::Int, vec![threads]);
    g.declare_array("out", ValueType::Float, vec![threads]);
    let t = g.add_node(NodeKind::TidSource(0), ValueType::Int);

    let loads: Vec<_> = (0..grid.ldst_units - 1)
        .map(|_| {
            let l = g.add_node(NodeKind::Load { array: "in".into(), pred: LoadPredicate::None }, ValueType::Int);
            g.connect(t, l, 0);
            l
        })
        .collect();
    let mut x = t;
    for j in 0..grid.alus {
        let other = loads.get(j).copied().unwrap_or(t);
        let n = g.add_node(NodeKind::Arith(ArithOp::Add), ValueType::Int);
        g.connect(x, n, 0);
        g.connect(other, n, 1);
        x = n;
    }
    for _ in 0..grid.splitjoin_units {
        let n = g.add_node(NodeKind::SplitJoin, ValueType::Int);
        g.connect(x, n, 0);
        g.connect(t, n, 1);
        x = n;
    }
    for _ in 0..grid.control_elevator_units {
        let n = g.add_node(NodeKind::Control(ControlOp::BitXor), ValueType::Int);
        g.connect(x, n, 0);
        g.connect(t, n, 1);
        x = n;
    }
    let f0 = g.add_node(NodeKind::Float(FloatOp::FromInt), ValueType::Float);
    g.connect(x, f0, 0);
    let mut f = f0;
    for _ in 1..grid.fpus {
        let n = g.add_node(NodeKind::Float(FloatOp::Add), ValueType::Float);
        g.connect(f, n, 0);
        g.connect(f0, n, 1);
        f = n;
    }
    for _ in 0..grid.special_units {
        let n = g.add_node(NodeKind::Special(SpecialOp::Sqrt), ValueType::Float);
        g.connect(f, n, 0);
        f = n;
    }
    let s = g.add_node(NodeKind::Store { array: "out".into(), predicated: false }, ValueType::Float);
    g.connect(t, s, 0);
    g.connect(f, s, 1);

    let inputs = ArrayData::from([("in".to_string(), (0..threads as i64).map(Scalar::Int).collect())]);
    (g, inputs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Throughput {
    /// `[small, large]` thread counts.
    pub threads: [usize; 2],
    pub unlimited: [u64; 2],
    pub limited: [u64; 2],
}

impl Throughput {
    /// Ratio of marginal cycles per extra thread, limited over unlimited.
    /// Fill and drain cancel out.
    pub fn steady(&self) -> f64 {
        (self.limited[1] - self.limited[0]) as f64 / (self.unlimited[1] - self.unlimited[0]) as f64
    }

    /// Plain cycle ratio at the larger thread count.
    pub fn raw(&self) -> f64 {
        self.limited[1] as f64 / self.unlimited[1] as f64
    }
}

/// Runs the saturating graph at two thread counts with and without an
/// issue limit of `width`.
pub fn throughput_ratio(grid: &GridConfig, threads: [usize; 2], width: usize) -> Result<Throughput, BenchError> {
    let mut unlimited = [0; 2];
    let mut limited = [0; 2];
    for (k, &n) in threads.iter().enumerate() {
        let (g, inputs) = saturating_graph(grid, n);
        let mapping = place_and_route(&g, grid)?;
        let fast = simulate(&g, &mapping, grid, &inputs, &SimOptions::default())?;
        let opts = SimOptions { issue_limit: Some(width), ..Default::default() };
        let slow = simulate(&g, &mapping, grid, &inputs, &opts)?;
        if fast.arrays != slow.arrays {
            return Err(BenchError::Failed { case: "saturating".into(), detail: "issue limit changed the results".into() });
        }
        unlimited[k] = fast.stats.cycles;
        limited[k] = slow.stats.cycles;
    }
    Ok(Throughput { threads, unlimited, limited })
}
