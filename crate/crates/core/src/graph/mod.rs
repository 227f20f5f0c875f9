//! Dataflow-graph IR with temporal (cross-thread) communication attributes.
//!
//! A [`DataflowGraph`] describes the per-thread computation of one kernel.
//! All threads of a block execute the same graph; nodes that move tokens
//! between threads ([`NodeKind::Elevator`], [`NodeKind::ELoadStore`],
//! [`NodeKind::LiveValue`]) carry a [`CommPattern`] describing the thread
//! offset and transmission window.

mod dump;
pub mod eval;
mod space;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::{Scalar, ValueType};

pub use dump::{to_dot, to_text};
pub use space::{RangeError, ThreadSpace, TidDelta};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Min,
    Max,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FloatOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    Neg,
    FromInt,
    ToInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpecialOp {
    Sqrt,
    Exp,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ControlOp {
    /// `(cond, a, b)`: all three operands required, yields `cond ? a : b`.
    Select,
    /// `(sel, a, b)`: only the selected operand is required and consumed.
    Merge,
    /// `(sel, v)`: forwards `v` when `sel` is false, otherwise swallows it.
    GateFalse,
    Cmp(CmpOp),
    And,
    Or,
    Not,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
}

/// What a predicated load does for threads whose predicate is false.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LoadPredicate {
    /// Unconditional load, one input port.
    None,
    /// Emits the type's zero without touching memory.
    ZeroIfFalse,
    /// Emits nothing.
    SkipIfFalse,
}

/// Thread offset plus transmission window of one communication operation.
///
/// `offset` is the source thread's coordinates minus the receiving thread's,
/// as written in the kernel source (`-1` means "read from the previous
/// thread"). Tokens therefore move by `shift = -linear(offset)` thread ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CommPattern {
    pub offset: TidDelta,
    pub window: usize,
}

impl CommPattern {
    pub fn new(offset: TidDelta, window: usize) -> Self {
        Self { offset, window }
    }

    /// Linear tag shift applied to a producer's token.
    pub fn shift(&self, space: &ThreadSpace) -> Result<i64, RangeError> {
        Ok(-self.offset.to_linear(space)?)
    }

    fn group(&self, tid: usize) -> usize {
        tid / self.window.max(1)
    }

    /// Producer of thread `tid`, or `None` if it falls outside the block
    /// (in any dimension) or outside `tid`'s window group.
    pub fn source_of(&self, tid: usize, space: &ThreadSpace) -> Option<usize> {
        let src = space.offset_tid(tid, &self.offset.offsets, 1)?;
        (self.group(src) == self.group(tid)).then_some(src)
    }

    /// Consumer of thread `tid`'s token; the inverse of [`Self::source_of`].
    pub fn target_of(&self, tid: usize, space: &ThreadSpace) -> Option<usize> {
        let dst = space.offset_tid(tid, &self.offset.offsets, -1)?;
        (self.group(dst) == self.group(tid)).then_some(dst)
    }
}

/// Position of an elevator inside a cascade. The head drops tokens whose
/// final consumer is invalid, the tail injects the fallback constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CascadeStage {
    pub index: usize,
    pub count: usize,
    pub retag: i64,
}

impl CascadeStage {
    pub fn whole(retag: i64) -> Self {
        Self { index: 0, count: 1, retag }
    }

    pub fn filters_targets(&self) -> bool {
        self.index == 0
    }

    pub fn injects_constants(&self) -> bool {
        self.index + 1 == self.count
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Arith(ArithOp),
    Float(FloatOp),
    Special(SpecialOp),
    Control(ControlOp),
    /// Joins a data token with an ordering token; preserves intra-thread
    /// memory order.
    SplitJoin,
    Load {
        array: String,
        pred: LoadPredicate,
    },
    /// Terminal memory write (the graph's sink). Inputs `(addr, value[, pred])`.
    Store {
        array: String,
        predicated: bool,
    },
    /// Load-or-forward unit. Inputs `(addr, enable)`.
    ELoadStore {
        array: String,
        comm: CommPattern,
        spilled: bool,
    },
    Elevator {
        comm: CommPattern,
        constant: Scalar,
        stage: CascadeStage,
    },
    /// Communication spilled to the live value cache: an elevator with an
    /// unbounded buffer and a store-then-load latency.
    LiveValue {
        comm: CommPattern,
        constant: Scalar,
    },
    ConstSource(Scalar),
    TidSource(usize),
}

/// Physical unit classes of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitClass {
    Alu,
    Fpu,
    Special,
    Ldst,
    SplitJoin,
    ControlElevator,
}

impl UnitClass {
    pub const ALL: [UnitClass; 6] = [
        UnitClass::Alu,
        UnitClass::Fpu,
        UnitClass::Special,
        UnitClass::Ldst,
        UnitClass::SplitJoin,
        UnitClass::ControlElevator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnitClass::Alu => "alu",
            UnitClass::Fpu => "fpu",
            UnitClass::Special => "special",
            UnitClass::Ldst => "ldst",
            UnitClass::SplitJoin => "splitjoin",
            UnitClass::ControlElevator => "control_elevator",
        }
    }
}

impl fmt::Display for UnitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl NodeKind {
    /// Fixed input arity of the kind.
    pub fn input_arity(&self) -> usize {
        use ControlOp::*;
        match self {
            NodeKind::Arith(ArithOp::Neg) => 1,
            NodeKind::Arith(_) => 2,
            NodeKind::Float(FloatOp::Neg | FloatOp::FromInt | FloatOp::ToInt) => 1,
            NodeKind::Float(_) => 2,
            NodeKind::Special(_) => 1,
            NodeKind::Control(Select | Merge) => 3,
            NodeKind::Control(Not) => 1,
            NodeKind::Control(_) => 2,
            NodeKind::SplitJoin => 2,
            NodeKind::Load { pred, .. } => match pred {
                LoadPredicate::None => 1,
                _ => 2,
            },
            NodeKind::Store { predicated, .. } => 2 + *predicated as usize,
            NodeKind::ELoadStore { .. } => 2,
            NodeKind::Elevator { .. } | NodeKind::LiveValue { .. } => 1,
            NodeKind::ConstSource(_) | NodeKind::TidSource(_) => 0,
        }
    }

    pub fn output_arity(&self) -> usize {
        1
    }

    pub fn unit_class(&self) -> Option<UnitClass> {
        match self {
            NodeKind::Arith(_) => Some(UnitClass::Alu),
            NodeKind::Float(_) => Some(UnitClass::Fpu),
            NodeKind::Special(_) => Some(UnitClass::Special),
            NodeKind::Control(_) | NodeKind::Elevator { .. } => Some(UnitClass::ControlElevator),
            NodeKind::SplitJoin => Some(UnitClass::SplitJoin),
            NodeKind::Load { .. } | NodeKind::Store { .. } | NodeKind::ELoadStore { .. } => {
                Some(UnitClass::Ldst)
            }
            NodeKind::LiveValue { .. } | NodeKind::ConstSource(_) | NodeKind::TidSource(_) => None,
        }
    }

    pub fn is_source(&self) -> bool {
        matches!(self, NodeKind::ConstSource(_) | NodeKind::TidSource(_))
    }

    /// True when the output for thread `t` carries another thread's data.
    pub fn crosses_threads(&self) -> bool {
        matches!(self, NodeKind::Elevator { .. } | NodeKind::LiveValue { .. })
    }

    pub fn comm(&self) -> Option<&CommPattern> {
        match self {
            NodeKind::ELoadStore { comm, .. }
            | NodeKind::Elevator { comm, .. }
            | NodeKind::LiveValue { comm, .. } => Some(comm),
            _ => None,
        }
    }

    pub fn memory_array(&self) -> Option<&str> {
        match self {
            NodeKind::Load { array, .. }
            | NodeKind::Store { array, .. }
            | NodeKind::ELoadStore { array, .. } => Some(array),
            _ => None,
        }
    }

    pub fn mnemonic(&self) -> String {
        match self {
            NodeKind::Arith(op) => format!("alu.{}", format!("{op:?}").to_lowercase()),
            NodeKind::Float(op) => format!("fpu.{}", format!("{op:?}").to_lowercase()),
            NodeKind::Special(op) => format!("sfu.{}", format!("{op:?}").to_lowercase()),
            NodeKind::Control(ControlOp::Cmp(c)) => {
                format!("ctl.cmp.{}", format!("{c:?}").to_lowercase())
            }
            NodeKind::Control(op) => format!("ctl.{}", format!("{op:?}").to_lowercase()),
            NodeKind::SplitJoin => "sju.join".into(),
            NodeKind::Load { .. } => "ld".into(),
            NodeKind::Store { .. } => "st".into(),
            NodeKind::ELoadStore { .. } => "eld".into(),
            NodeKind::Elevator { .. } => "elev".into(),
            NodeKind::LiveValue { .. } => "lvc".into(),
            NodeKind::ConstSource(_) => "const".into(),
            NodeKind::TidSource(_) => "tid".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub inputs: usize,
    pub outputs: usize,
    pub ty: ValueType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: NodeId,
    pub src_port: usize,
    pub dst: NodeId,
    pub dst_port: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayDecl {
    pub name: String,
    pub ty: ValueType,
    /// Per-dimension extents, row-major (last dimension fastest).
    pub dims: Vec<usize>,
}

impl ArrayDecl {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataflowGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub space: ThreadSpace,
    pub arrays: Vec<ArrayDecl>,
}

impl DataflowGraph {
    pub fn new(space: ThreadSpace) -> Self {
        Self { nodes: Vec::new(), edges: Vec::new(), space, arrays: Vec::new() }
    }

    pub fn declare_array(&mut self, name: impl Into<String>, ty: ValueType, dims: Vec<usize>) {
        self.arrays.push(ArrayDecl { name: name.into(), ty, dims });
    }

    pub fn array(&self, name: &str) -> Option<&ArrayDecl> {
        self.arrays.iter().find(|a| a.name == name)
    }

    pub fn add_node(&mut self, kind: NodeKind, ty: ValueType) -> NodeId {
        let inputs = kind.input_arity();
        self.add_node_with_arity(kind, ty, inputs)
    }

    /// Adds a node with an explicit input arity, which [`validate`] checks
    /// against the kind.
    pub fn add_node_with_arity(&mut self, kind: NodeKind, ty: ValueType, inputs: usize) -> NodeId {
        let id = NodeId(self.nodes.len());
        let outputs = kind.output_arity();
        self.nodes.push(Node { id, kind, inputs, outputs, ty });
        id
    }

    pub fn connect(&mut self, src: NodeId, dst: NodeId, dst_port: usize) {
        self.edges.push(Edge { src, src_port: 0, dst, dst_port });
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Producer of each input port (`None` if unconnected; the first edge
    /// wins if a port is multiply driven).
    pub fn input_sources(&self) -> Vec<Vec<Option<NodeId>>> {
        let mut out: Vec<Vec<Option<NodeId>>> =
            self.nodes.iter().map(|n| vec![None; n.inputs]).collect();
        for e in &self.edges {
            if let Some(slot) = out.get_mut(e.dst.0).and_then(|ports| ports.get_mut(e.dst_port)) {
                slot.get_or_insert(e.src);
            }
        }
        out
    }

    /// Consumers `(dst, port)` of each node's output, in edge order.
    pub fn consumers(&self) -> Vec<Vec<(NodeId, usize)>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if e.src.0 < out.len() {
                out[e.src.0].push((e.dst, e.dst_port));
            }
        }
        out
    }

    /// Node count per unit class (unplaced kinds are skipped).
    pub fn class_counts(&self) -> std::collections::BTreeMap<UnitClass, usize> {
        let mut counts = std::collections::BTreeMap::new();
        for n in &self.nodes {
            if let Some(c) = n.kind.unit_class() {
                *counts.entry(c).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Ids of nodes in an order where intra-thread producers precede their
    /// consumers. Edges leaving cross-thread nodes are ignored; any residual
    /// cycle is broken at the lowest id.
    pub fn topo_order(&self) -> Vec<NodeId> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            if e.src.0 >= n || e.dst.0 >= n || self.nodes[e.src.0].kind.crosses_threads() {
                continue;
            }
            succ[e.src.0].push(e.dst.0);
            indeg[e.dst.0] += 1;
        }
        let mut done = vec![false; n];
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = match ready.pop_first() {
                Some(i) => i,
                None => (0..n).find(|&i| !done[i]).expect("unvisited node"),
            };
            if done[next] {
                continue;
            }
            done[next] = true;
            order.push(NodeId(next));
            for &s in &succ[next] {
                indeg[s] = indeg[s].saturating_sub(1);
                if indeg[s] == 0 && !done[s] {
                    ready.insert(s);
                }
            }
        }
        order
    }
}
