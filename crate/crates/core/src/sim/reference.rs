//! Sequential graph evaluator: computes every store's operands thread by
//! thread without timing, buffers or placement. Cross-thread operands are
//! resolved on demand, so it handles any communication pattern as long as
//! no array is both loaded and stored.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::graph::{eval, ControlOp, DataflowGraph, LoadPredicate, NodeId, NodeKind};
use crate::scalar::Scalar;
use crate::ArrayData;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReferenceError {
    #[error("array `{0}` is both loaded and stored")]
    ReadWrite(String),
    #[error("{node} for tid {tid} depends on itself")]
    Cycle { node: NodeId, tid: usize },
    #[error("{node} for tid {tid} never receives a value")]
    Starved { node: NodeId, tid: usize },
    #[error("index {index} out of range for array `{array}`")]
    OutOfRange { array: String, index: i64 },
    #[error("unknown array `{0}`")]
    UnknownArray(String),
}

/// `None` means the node emits no token for that thread.
type Val = Option<Scalar>;

enum Step {
    Done(Val),
    Need(Vec<(NodeId, usize)>),
}

struct Ref<'a> {
    g: &'a DataflowGraph,
    mem: &'a ArrayData,
    sources: Vec<Vec<Option<NodeId>>>,
    memo: HashMap<(NodeId, usize), Val>,
}

impl Ref<'_> {
    fn input(&self, node: NodeId, port: usize, tid: usize) -> Result<Val, (NodeId, usize)> {
        let src = self.sources[node.0][port].expect("validated graph");
        self.memo.get(&(src, tid)).copied().ok_or((src, tid))
    }

    fn read(&self, array: &str, index: i64) -> Result<Scalar, ReferenceError> {
        let data = self.mem.get(array).ok_or_else(|| ReferenceError::UnknownArray(array.into()))?;
        usize::try_from(index)
            .ok()
            .and_then(|i| data.get(i).copied())
            .ok_or_else(|| ReferenceError::OutOfRange { array: array.into(), index })
    }

    /// Evaluates `node` for `tid` if the needed inputs are memoized.
    fn step(&self, node: NodeId, tid: usize) -> Result<Step, ReferenceError> {
        let n = self.g.node(node);
        let space = &self.g.space;
        let mut need = Vec::new();
        let mut get = |port: usize, t: usize| match self.input(node, port, t) {
            Ok(v) => Some(v),
            Err(k) => {
                need.push(k);
                None
            }
        };
        macro_rules! want {
            ($e:expr) => {
                match $e {
                    Some(v) => v,
                    None => return Ok(Step::Need(need)),
                }
            };
        }
        let v = match &n.kind {
            NodeKind::ConstSource(c) => Some(c.cast(n.ty)),
            NodeKind::TidSource(axis) => Some(Scalar::Int(space.coord(tid, *axis) as i64).cast(n.ty)),
            NodeKind::Elevator { comm, constant, stage } => {
                if stage.injects_constants() && comm.source_of(tid, space).is_none() {
                    Some(constant.cast(n.ty))
                } else {
                    let from = tid as i64 - stage.retag;
                    if from < 0 || from as usize >= space.block_size() {
                        return Err(ReferenceError::Starved { node, tid });
                    }
                    want!(get(0, from as usize))
                }
            }
            NodeKind::LiveValue { comm, constant } => match comm.source_of(tid, space) {
                None => Some(constant.cast(n.ty)),
                Some(s) => want!(get(0, s)),
            },
            NodeKind::ELoadStore { array, comm, .. } => {
                let en = want!(get(1, tid));
                match en {
                    None => None,
                    Some(en) if en.truthy() => {
                        let addr = want!(get(0, tid));
                        match addr {
                            Some(a) => Some(self.read(array, a.as_int())?.cast(n.ty)),
                            None => None,
                        }
                    }
                    Some(_) => match comm.source_of(tid, space) {
                        None => return Err(ReferenceError::Starved { node, tid }),
                        Some(s) => match self.memo.get(&(node, s)) {
                            Some(v) => *v,
                            None => return Ok(Step::Need(vec![(node, s)])),
                        },
                    },
                }
            }
            NodeKind::Load { array, pred } => {
                let addr = want!(get(0, tid));
                let enabled = match pred {
                    LoadPredicate::None => Some(Scalar::Int(1)),
                    _ => want!(get(1, tid)),
                };
                match (addr, enabled) {
                    (Some(a), Some(e)) if e.truthy() => Some(self.read(array, a.as_int())?.cast(n.ty)),
                    (Some(_), Some(_)) if *pred == LoadPredicate::ZeroIfFalse => Some(n.ty.zero()),
                    _ => None,
                }
            }
            // The done token carries the stored value whether or not the write happened.
            NodeKind::Store { .. } => want!(get(1, tid)),
            NodeKind::Control(ControlOp::Merge) => {
                let sel = want!(get(0, tid));
                match sel {
                    None => None,
                    Some(s) => want!(get(if s.truthy() { 1 } else { 2 }, tid)).map(|v| v.cast(n.ty)),
                }
            }
            NodeKind::Control(ControlOp::GateFalse) => {
                let sel = get(0, tid);
                let v = get(1, tid);
                let (sel, v) = (want!(sel), want!(v));
                match (sel, v) {
                    (Some(s), Some(v)) if !s.truthy() => Some(v.cast(n.ty)),
                    _ => None,
                }
            }
            kind => {
                let ops: Vec<Option<Val>> = (0..n.inputs).map(|p| get(p, tid)).collect();
                if !need.is_empty() {
                    return Ok(Step::Need(need));
                }
                let ops: Option<Vec<Scalar>> = ops.into_iter().map(|o| o.expect("checked")).collect();
                ops.and_then(|ops| eval::evaluate(kind, n.ty, &ops))
            }
        };
        Ok(Step::Done(v))
    }

    fn value(&mut self, node: NodeId, tid: usize) -> Result<Val, ReferenceError> {
        let mut stack = vec![(node, tid)];
        let mut open: HashSet<(NodeId, usize)> = HashSet::new();
        while let Some(&top) = stack.last() {
            if self.memo.contains_key(&top) {
                stack.pop();
                open.remove(&top);
                continue;
            }
            match self.step(top.0, top.1)? {
                Step::Done(v) => {
                    self.memo.insert(top, v);
                    open.remove(&top);
                    stack.pop();
                }
                Step::Need(deps) => {
                    open.insert(top);
                    for d in deps {
                        if open.contains(&d) {
                            return Err(ReferenceError::Cycle { node: d.0, tid: d.1 });
                        }
                        stack.push(d);
                    }
                }
            }
        }
        Ok(self.memo[&(node, tid)])
    }
}

/// Final array contents after running every thread of `g` in tid order.
pub fn reference_run(g: &DataflowGraph, inputs: &ArrayData) -> Result<ArrayData, ReferenceError> {
    let mut loaded = HashSet::new();
    let mut stored = HashSet::new();
    for n in &g.nodes {
        match &n.kind {
            NodeKind::Load { array, .. } | NodeKind::ELoadStore { array, .. } => {
                loaded.insert(array.clone());
            }
            NodeKind::Store { array, .. } => {
                stored.insert(array.clone());
            }
            _ => {}
        }
    }
    if let Some(a) = loaded.intersection(&stored).next() {
        return Err(ReferenceError::ReadWrite(a.clone()));
    }
    let mut mem = ArrayData::new();
    for a in &g.arrays {
        let init = match inputs.get(&a.name) {
            Some(v) => v.iter().map(|s| s.cast(a.ty)).collect(),
            None => vec![a.ty.zero(); a.len()],
        };
        mem.insert(a.name.clone(), init);
    }
    let initial = mem.clone();
    let mut r = Ref { g, mem: &initial, sources: g.input_sources(), memo: HashMap::new() };
    let stores: Vec<&crate::graph::Node> = g.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Store { .. })).collect();
    for tid in 0..g.space.block_size() {
        for n in &stores {
            let NodeKind::Store { array, predicated } = &n.kind else { unreachable!() };
            let mut ops = Vec::new();
            for port in 0..n.inputs {
                let src = r.sources[n.id.0][port].expect("validated graph");
                ops.push(r.value(src, tid)?);
            }
            let enabled = !*predicated || ops[2].is_some_and(Scalar::truthy);
            if !enabled {
                continue;
            }
            let (Some(addr), Some(v)) = (ops[0], ops[1]) else {
                return Err(ReferenceError::Starved { node: n.id, tid });
            };
            let ty = g.array(array).ok_or_else(|| ReferenceError::UnknownArray(array.clone()))?.ty;
            let slot = usize::try_from(addr.as_int())
                .ok()
                .and_then(|i| mem.get_mut(array).expect("declared").get_mut(i))
                .ok_or_else(|| ReferenceError::OutOfRange { array: array.clone(), index: addr.as_int() })?;
            *slot = v.cast(ty);
        }
    }
    Ok(mem)
}
