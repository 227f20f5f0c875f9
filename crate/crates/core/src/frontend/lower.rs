use std::collections::{BTreeMap, HashMap};

use super::ast::{Expr, KernelAst, Stmt};
use super::typing;
use super::{FrontendError, Pos};
use crate::graph::{
    ArithOp, CascadeStage, CommPattern, ControlOp, DataflowGraph, LoadPredicate, NodeId, NodeKind, ThreadSpace, TidDelta,
};
use crate::scalar::{Scalar, ValueType};

/// Lowers a parsed kernel to a dataflow graph for the given thread space.
///
/// Loops are fully unrolled, `if`/`else` becomes predication plus `Select`,
/// and every communication intrinsic becomes exactly one `Elevator` or
/// `ELoadStore` node.
pub fn lower(ast: &KernelAst, space: &ThreadSpace) -> Result<DataflowGraph, FrontendError> {
    let mut g = DataflowGraph::new(space.clone());
    for a in &ast.arrays {
        g.declare_array(a.name.clone(), a.ty, a.dims.clone());
    }
    let mut l = Lowerer {
        g,
        env: BTreeMap::new(),
        pred: None,
        branch_depth: 0,
        path: vec![0],
        next_scope: 1,
        cse: HashMap::new(),
        consts: HashMap::new(),
        tids: [None; 3],
        mem: HashMap::new(),
        tags: Vec::new(),
        pending: Vec::new(),
        intrinsics: Vec::new(),
    };
    l.block(&ast.body)?;
    l.resolve_elevators()?;
    Ok(l.finish())
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Val {
    Const(Scalar),
    Node(NodeId, ValueType),
}

impl Val {
    fn ty(self) -> ValueType {
        match self {
            Val::Const(s) => s.ty(),
            Val::Node(_, t) => t,
        }
    }
}

#[derive(Default)]
struct MemState {
    last_store: Option<NodeId>,
    loads_since: Vec<NodeId>,
    epoch: usize,
}

struct Tag {
    var: String,
    path: Vec<usize>,
    def: Val,
    pos: Pos,
}

struct PendingElevator {
    node: NodeId,
    var: String,
    path: Vec<usize>,
    pos: Pos,
}

struct Lowerer {
    g: DataflowGraph,
    env: BTreeMap<String, Val>,
    /// Current predicate inside `if` branches; `None` means always true.
    pred: Option<Val>,
    branch_depth: usize,
    /// Unrolled block instances enclosing the current statement.
    path: Vec<usize>,
    next_scope: usize,
    cse: HashMap<(String, ValueType, Vec<NodeId>), NodeId>,
    consts: HashMap<Scalar, NodeId>,
    tids: [Option<NodeId>; 3],
    mem: HashMap<String, MemState>,
    tags: Vec<Tag>,
    pending: Vec<PendingElevator>,
    intrinsics: Vec<NodeId>,
}

type LResult<T> = Result<T, FrontendError>;

impl Lowerer {
    fn materialize(&mut self, v: Val) -> NodeId {
        match v {
            Val::Node(id, _) => id,
            Val::Const(s) => *self.consts.entry(s).or_insert_with(|| self.g.add_node(NodeKind::ConstSource(s), s.ty())),
        }
    }

    fn raw_node(&mut self, kind: NodeKind, ty: ValueType, inputs: &[NodeId]) -> NodeId {
        let id = self.g.add_node(kind, ty);
        for (port, &src) in inputs.iter().enumerate() {
            self.g.connect(src, id, port);
        }
        id
    }

    /// Pure operation: folded when every operand is constant, otherwise
    /// shared with an identical earlier node.
    fn pure(&mut self, kind: NodeKind, ty: ValueType, inputs: &[Val]) -> Val {
        if let Some(consts) = inputs.iter().map(|v| if let Val::Const(s) = v { Some(*s) } else { None }).collect::<Option<Vec<_>>>() {
            if let Some(s) = crate::graph::eval::evaluate(&kind, ty, &consts) {
                return Val::Const(s);
            }
        }
        let ids: Vec<NodeId> = inputs.iter().map(|&v| self.materialize(v)).collect();
        let key = (format!("{kind:?}"), ty, ids.clone());
        if let Some(&id) = self.cse.get(&key) {
            return Val::Node(id, ty);
        }
        let id = self.raw_node(kind, ty, &ids);
        self.cse.insert(key, id);
        Val::Node(id, ty)
    }

    fn block(&mut self, body: &[Stmt]) -> LResult<()> {
        for s in body {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> LResult<()> {
        match s {
            Stmt::Assign { var, value, .. } => {
                let v = self.expr(value)?;
                self.env.insert(var.clone(), v);
            }
            Stmt::Store { array, indices, value, pos } => {
                let v = self.expr(value)?;
                self.store(array, indices, v, *pos)?;
            }
            Stmt::If { cond, then_body, else_body, .. } => {
                let c = self.expr(cond)?;
                if let Val::Const(c) = c {
                    return self.block(if c.truthy() { then_body } else { else_body });
                }
                self.branch(c, then_body, else_body)?;
            }
            Stmt::For { var, start, end, step, body, .. } => {
                let mut i = *start;
                while (*step > 0 && i < *end) || (*step < 0 && i > *end) {
                    self.path.push(self.next_scope);
                    self.next_scope += 1;
                    self.env.insert(var.clone(), Val::Const(Scalar::Int(i)));
                    let r = self.block(body);
                    self.path.pop();
                    r?;
                    i += step;
                }
                self.env.remove(var);
            }
            Stmt::Tag { var, pos } => {
                if self.branch_depth > 0 {
                    return Err(FrontendError::MultipleReachingDefinitions { pos: *pos, var: var.clone() });
                }
                let def = *self.env.get(var).ok_or_else(|| FrontendError::UndefinedVariable { pos: *pos, name: var.clone() })?;
                self.tags.push(Tag { var: var.clone(), path: self.path.clone(), def, pos: *pos });
            }
        }
        Ok(())
    }

    fn and(&mut self, a: Option<Val>, b: Val) -> Val {
        match a {
            None => b,
            Some(a) => self.pure(NodeKind::Control(ControlOp::And), ValueType::Int, &[a, b]),
        }
    }

    fn branch(&mut self, c: Val, then_body: &[Stmt], else_body: &[Stmt]) -> LResult<()> {
        let outer = self.pred;
        let before = self.env.clone();
        let not_c = self.pure(NodeKind::Control(ControlOp::Not), ValueType::Int, &[c]);
        let p_then = self.and(outer, c);
        let p_else = self.and(outer, not_c);

        self.branch_depth += 1;
        self.pred = Some(p_then);
        let r = self.block(then_body);
        let env_then = std::mem::replace(&mut self.env, before);
        let r = r.and_then(|_| {
            self.pred = Some(p_else);
            self.block(else_body)
        });
        self.branch_depth -= 1;
        self.pred = outer;
        r?;
        let env_else = std::mem::take(&mut self.env);

        let mut merged = BTreeMap::new();
        for (var, &t) in &env_then {
            let Some(&e) = env_else.get(var) else { continue };
            let v = if t == e {
                t
            } else {
                let (kind, ty) = typing::select_type(t.ty(), e.ty());
                self.pure(kind, ty, &[c, t, e])
            };
            merged.insert(var.clone(), v);
        }
        self.env = merged;
        Ok(())
    }

    fn tid(&mut self, axis: usize) -> Val {
        if axis >= self.g.space.dims() {
            return Val::Const(Scalar::Int(0));
        }
        let id = match self.tids[axis] {
            Some(id) => id,
            None => {
                let id = self.g.add_node(NodeKind::TidSource(axis), ValueType::Int);
                self.tids[axis] = Some(id);
                id
            }
        };
        Val::Node(id, ValueType::Int)
    }

    fn array_ty(&self, array: &str, pos: Pos) -> LResult<(ValueType, Vec<usize>)> {
        self.g
            .array(array)
            .map(|a| (a.ty, a.dims.clone()))
            .ok_or_else(|| FrontendError::UndeclaredArray { pos, name: array.to_string() })
    }

    /// Row-major element index, ordered after the last store to the array.
    fn address(&mut self, array: &str, indices: &[Expr], pos: Pos) -> LResult<Val> {
        let (_, dims) = self.array_ty(array, pos)?;
        let mut addr = Val::Const(Scalar::Int(0));
        for (k, idx) in indices.iter().enumerate() {
            let i = self.expr(idx)?;
            if i.ty() != ValueType::Int {
                return Err(FrontendError::Type { pos, msg: format!("index into `{array}` must be an integer") });
            }
            addr = if k == 0 {
                i
            } else {
                let dim = Val::Const(Scalar::Int(dims[k] as i64));
                let scaled = self.pure(NodeKind::Arith(ArithOp::Mul), ValueType::Int, &[addr, dim]);
                self.pure(NodeKind::Arith(ArithOp::Add), ValueType::Int, &[scaled, i])
            };
        }
        let last_store = self.mem.get(array).and_then(|m| m.last_store);
        Ok(match last_store {
            Some(st) => {
                let a = self.materialize(addr);
                Val::Node(self.raw_node(NodeKind::SplitJoin, ValueType::Int, &[a, st]), ValueType::Int)
            }
            None => addr,
        })
    }

    fn load(&mut self, array: &str, indices: &[Expr], pos: Pos) -> LResult<Val> {
        let (ty, _) = self.array_ty(array, pos)?;
        let addr = self.address(array, indices, pos)?;
        let a = self.materialize(addr);
        let pred = self.pred.map(|p| self.materialize(p));
        let epoch = self.mem.get(array).map_or(0, |m| m.epoch);
        let mut inputs = vec![a];
        inputs.extend(pred);
        let key = (format!("load {array} {epoch}"), ty, inputs.clone());
        if let Some(&id) = self.cse.get(&key) {
            return Ok(Val::Node(id, ty));
        }
        let pred_kind = if pred.is_some() { LoadPredicate::ZeroIfFalse } else { LoadPredicate::None };
        let id = self.raw_node(NodeKind::Load { array: array.to_string(), pred: pred_kind }, ty, &inputs);
        self.cse.insert(key, id);
        self.mem.entry(array.to_string()).or_default().loads_since.push(id);
        Ok(Val::Node(id, ty))
    }

    fn store(&mut self, array: &str, indices: &[Expr], value: Val, pos: Pos) -> LResult<()> {
        let (ty, _) = self.array_ty(array, pos)?;
        let addr = self.address(array, indices, pos)?;
        let a = self.materialize(addr);
        let mut v = self.materialize(value);
        let state = self.mem.entry(array.to_string()).or_default();
        let mut deps = std::mem::take(&mut state.loads_since);
        deps.extend(state.last_store);
        deps.sort();
        deps.dedup();
        for dep in deps {
            if dep != v {
                v = self.raw_node(NodeKind::SplitJoin, value.ty(), &[v, dep]);
            }
        }
        let pred = self.pred.map(|p| self.materialize(p));
        let mut inputs = vec![a, v];
        inputs.extend(pred);
        let id = self.raw_node(NodeKind::Store { array: array.to_string(), predicated: pred.is_some() }, ty, &inputs);
        let state = self.mem.entry(array.to_string()).or_default();
        state.last_store = Some(id);
        state.epoch += 1;
        Ok(())
    }

    fn compile_time(&self, e: &Expr, pos: Pos, what: &str) -> LResult<Scalar> {
        let env = |name: &str| match self.env.get(name) {
            Some(Val::Const(s)) => Some(*s),
            _ => None,
        };
        typing::const_eval(e, &env)
            .map_err(|err| err.at(pos))?
            .ok_or_else(|| FrontendError::NotCompileTime { pos, what: what.to_string() })
    }

    fn comm(&self, delta: &[Expr], window: Option<&Expr>, pos: Pos) -> LResult<CommPattern> {
        let mut offsets = Vec::with_capacity(delta.len());
        for d in delta {
            match self.compile_time(d, pos, "communication delta")? {
                Scalar::Int(v) => offsets.push(v),
                Scalar::Float(_) => {
                    return Err(FrontendError::Type { pos, msg: "communication delta must be an integer".into() })
                }
            }
        }
        let offset = TidDelta::new(offsets);
        if offset.is_zero() {
            return Err(FrontendError::syntax(pos, "communication delta must be nonzero"));
        }
        offset.to_linear(&self.g.space).map_err(|source| FrontendError::Range { pos, source })?;
        let window = match window {
            None => self.g.space.block_size(),
            Some(w) => match self.compile_time(w, pos, "window")? {
                Scalar::Int(v) => v.max(0) as usize,
                Scalar::Float(_) => return Err(FrontendError::Type { pos, msg: "window must be an integer".into() }),
            },
        };
        Ok(CommPattern::new(offset, window))
    }

    fn visible_tag(&self, var: &str) -> Option<&Tag> {
        self.tags
            .iter()
            .filter(|t| t.var == var && self.path.starts_with(&t.path))
            .max_by_key(|t| t.path.len())
    }

    fn expr(&mut self, e: &Expr) -> LResult<Val> {
        Ok(match e {
            Expr::Int(v) => Val::Const(Scalar::Int(*v)),
            Expr::Float(v) => Val::Const(Scalar::Float(*v)),
            Expr::Var(name, pos) => {
                *self.env.get(name).ok_or_else(|| FrontendError::UndefinedVariable { pos: *pos, name: name.clone() })?
            }
            Expr::Tid(axis) => self.tid(*axis),
            Expr::Index { array, indices, pos } => self.load(array, indices, *pos)?,
            Expr::Unary(op, a) => {
                let a = self.expr(a)?;
                let (kind, ty) = typing::unary_kind(*op, a.ty());
                self.pure(kind, ty, &[a])
            }
            Expr::Binary(op, a, b) => {
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                let (kind, ty) = typing::binary_kind(*op, a.ty(), b.ty()).map_err(|err| err.at(expr_pos(e)))?;
                self.pure(kind, ty, &[a, b])
            }
            Expr::Ternary(c, a, b) => {
                let c = self.expr(c)?;
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                let (kind, ty) = typing::select_type(a.ty(), b.ty());
                self.pure(kind, ty, &[c, a, b])
            }
            Expr::Call(b, args) => {
                let vals = args.iter().map(|a| self.expr(a)).collect::<LResult<Vec<_>>>()?;
                let tys: Vec<ValueType> = vals.iter().map(|v| v.ty()).collect();
                match typing::builtin_kind(*b, &tys) {
                    Some((kind, ty)) => self.pure(kind, ty, &vals),
                    None => vals[0],
                }
            }
            Expr::FromThreadOrConst { var, delta, constant, window, pos } => {
                if self.branch_depth > 0 {
                    return Err(FrontendError::DivergentCommunication { pos: *pos });
                }
                let comm = self.comm(delta, window.as_deref(), *pos)?;
                let c = self.compile_time(constant, *pos, "fallback constant")?;
                let ty = self
                    .visible_tag(var)
                    .map(|t| t.def.ty())
                    .or_else(|| self.env.get(var).map(|v| v.ty()))
                    .unwrap_or(c.ty());
                let shift = comm.shift(&self.g.space).expect("checked");
                let kind = NodeKind::Elevator { comm, constant: c.cast(ty), stage: CascadeStage::whole(shift) };
                let id = self.g.add_node(kind, ty);
                self.pending.push(PendingElevator { node: id, var: var.clone(), path: self.path.clone(), pos: *pos });
                self.intrinsics.push(id);
                Val::Node(id, ty)
            }
            Expr::FromThreadOrMem { delta, window, array, indices, pred, pos } => {
                if self.branch_depth > 0 {
                    return Err(FrontendError::DivergentCommunication { pos: *pos });
                }
                let comm = self.comm(delta, window.as_deref(), *pos)?;
                let (ty, _) = self.array_ty(array, *pos)?;
                let addr = self.address(array, indices, *pos)?;
                let en = self.expr(pred)?;
                let (a, en) = (self.materialize(addr), self.materialize(en));
                let kind = NodeKind::ELoadStore { array: array.clone(), comm, spilled: false };
                let id = self.raw_node(kind, ty, &[a, en]);
                self.mem.entry(array.clone()).or_default().loads_since.push(id);
                self.intrinsics.push(id);
                Val::Node(id, ty)
            }
        })
    }

    fn resolve_elevators(&mut self) -> LResult<()> {
        for p in std::mem::take(&mut self.pending) {
            let candidates: Vec<&Tag> = self.tags.iter().filter(|t| t.var == p.var && p.path.starts_with(&t.path)).collect();
            let Some(depth) = candidates.iter().map(|t| t.path.len()).max() else {
                return Err(FrontendError::MissingTag { pos: p.pos, var: p.var });
            };
            let innermost: Vec<&&Tag> = candidates.iter().filter(|t| t.path.len() == depth).collect();
            if innermost.len() > 1 {
                return Err(FrontendError::MultipleReachingDefinitions { pos: innermost[1].pos, var: p.var });
            }
            let def = innermost[0].def;
            let ty = self.g.node(p.node).ty;
            if def.ty() != ty {
                return Err(FrontendError::Type {
                    pos: p.pos,
                    msg: format!("`{}` is {} but the fallback constant is {}", p.var, def.ty(), ty),
                });
            }
            let src = self.materialize(def);
            self.g.connect(src, p.node, 0);
        }
        Ok(())
    }

    /// Drops nodes that reach neither a store nor a communication node, then
    /// renumbers densely in creation order.
    fn finish(self) -> DataflowGraph {
        let g = self.g;
        let n = g.len();
        let mut keep = vec![false; n];
        let mut stack: Vec<usize> = g
            .nodes
            .iter()
            .filter(|node| matches!(node.kind, NodeKind::Store { .. }))
            .map(|node| node.id.0)
            .chain(self.intrinsics.iter().map(|id| id.0))
            .collect();
        let sources = g.input_sources();
        while let Some(i) = stack.pop() {
            if keep[i] {
                continue;
            }
            keep[i] = true;
            stack.extend(sources[i].iter().flatten().map(|id| id.0));
        }
        let mut remap = vec![None; n];
        let mut out = DataflowGraph::new(g.space.clone());
        out.arrays = g.arrays.clone();
        for node in &g.nodes {
            if keep[node.id.0] {
                remap[node.id.0] = Some(out.add_node_with_arity(node.kind.clone(), node.ty, node.inputs));
            }
        }
        for e in &g.edges {
            if let (Some(src), Some(dst)) = (remap[e.src.0], remap[e.dst.0]) {
                out.connect(src, dst, e.dst_port);
            }
        }
        out
    }
}

fn expr_pos(e: &Expr) -> Pos {
    match e {
        Expr::Var(_, pos) | Expr::Index { pos, .. } => *pos,
        Expr::FromThreadOrConst { pos, .. } | Expr::FromThreadOrMem { pos, .. } => *pos,
        Expr::Unary(_, a) => expr_pos(a),
        Expr::Binary(_, a, b) => {
            let p = expr_pos(a);
            if p == Pos::default() {
                expr_pos(b)
            } else {
                p
            }
        }
        Expr::Ternary(a, _, _) => expr_pos(a),
        Expr::Call(_, args) => args.first().map(expr_pos).unwrap_or_default(),
        Expr::Int(_) | Expr::Float(_) | Expr::Tid(_) => Pos::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::graph::{validate, FloatOp, UnitClass};

    fn build(src: &str, space: ThreadSpace) -> Result<DataflowGraph, FrontendError> {
        lower(&parse(src)?, &space)
    }

    fn count(g: &DataflowGraph, f: impl Fn(&NodeKind) -> bool) -> usize {
        g.nodes.iter().filter(|n| f(&n.kind)).count()
    }

    const CONV: &str = "
        const N = 32;
        global float in[N];
        global float out[N];
        kernel conv {
            x = in[threadIdx.x];
            tagValue<x>();
            left = fromThreadOrConst<x, -1, 0.0>();
            right = fromThreadOrConst<x, 1, 0.0>();
            out[threadIdx.x] = 0.25 * left + 0.5 * x + 0.25 * right;
        }";

    #[test]
    fn convolution_shape() {
        let g = build(CONV, ThreadSpace::linear(32)).unwrap();
        assert!(validate(&g).is_ok(), "{:?}", validate(&g));
        assert_eq!(count(&g, |k| matches!(k, NodeKind::Load { .. })), 1);
        assert_eq!(count(&g, |k| matches!(k, NodeKind::Store { .. })), 1);
        assert_eq!(count(&g, |k| matches!(k, NodeKind::Float(FloatOp::Mul))), 3);
        assert_eq!(count(&g, |k| matches!(k, NodeKind::Float(FloatOp::Add))), 2);
        let mut offsets: Vec<i64> = g
            .nodes
            .iter()
            .filter_map(|n| match &n.kind {
                NodeKind::Elevator { comm, constant, .. } => {
                    assert_eq!(*constant, Scalar::Float(0.0));
                    Some(comm.offset.offsets[0])
                }
                _ => None,
            })
            .collect();
        offsets.sort();
        assert_eq!(offsets, vec![-1, 1]);
    }

    #[test]
    fn prefix_sum_feeds_elevator_from_tagged_sum() {
        let src = "global int in[16]; global int out[16]; kernel p {
            sum = in[threadIdx.x] + fromThreadOrConst<sum, -1, 0>();
            tagValue<sum>();
            out[threadIdx.x] = sum;
        }";
        let g = build(src, ThreadSpace::linear(16)).unwrap();
        assert!(validate(&g).is_ok());
        let elev = g.nodes.iter().find(|n| matches!(n.kind, NodeKind::Elevator { .. })).unwrap().id;
        let add = g.nodes.iter().find(|n| matches!(n.kind, NodeKind::Arith(ArithOp::Add))).unwrap().id;
        assert!(g.edges.iter().any(|e| e.src == add && e.dst == elev));
        assert!(g.edges.iter().any(|e| e.src == elev && e.dst == add));
    }

    #[test]
    fn missing_tag_is_an_error() {
        let src = "global int a[4]; kernel k { a[threadIdx.x] = fromThreadOrConst<v, -1, 0>(); }";
        assert!(matches!(build(src, ThreadSpace::linear(4)), Err(FrontendError::MissingTag { .. })));
    }

    #[test]
    fn tag_inside_branch_is_ambiguous() {
        let src = "global int a[4]; kernel k {
            v = 1; if (threadIdx.x > 1) { v = 2; tagValue<v>(); }
            a[threadIdx.x] = fromThreadOrConst<v, -1, 0>();
        }";
        assert!(matches!(build(src, ThreadSpace::linear(4)), Err(FrontendError::MultipleReachingDefinitions { .. })));
    }

    #[test]
    fn matmul_unrolls_two_eldst_per_iteration() {
        let src = "const K = 3; global float A[4][3]; global float B[3][4]; global float C[4][4];
        kernel mm {
            x = threadIdx.x; y = threadIdx.y;
            acc = 0.0;
            for (i = 0; i < K; i++) {
                a = fromThreadOrMem<{-1, 0}>(A[y][i], x == 0);
                b = fromThreadOrMem<{0, -1}>(B[i][x], y == 0);
                acc += a * b;
            }
            C[y][x] = acc;
        }";
        let g = build(src, ThreadSpace::new(vec![4, 4]).unwrap()).unwrap();
        assert!(validate(&g).is_ok(), "{:?}", validate(&g));
        assert_eq!(count(&g, |k| matches!(k, NodeKind::ELoadStore { .. })), 6);
        assert_eq!(count(&g, |k| matches!(k, NodeKind::Float(FloatOp::Mul))), 3);
        assert_eq!(g.class_counts()[&UnitClass::Ldst], 7);
    }

    #[test]
    fn branches_become_selects_and_predicated_memory() {
        let src = "global int a[8]; global int b[8]; kernel k {
            t = threadIdx.x; v = 0;
            if (t > 0) { v = a[t - 1]; } else { b[t] = 7; }
            a[t] = v;
        }";
        let g = build(src, ThreadSpace::linear(8)).unwrap();
        assert!(validate(&g).is_ok(), "{:?}", validate(&g));
        assert!(g.nodes.iter().any(|n| matches!(n.kind, NodeKind::Load { pred: LoadPredicate::ZeroIfFalse, .. })));
        assert!(g.nodes.iter().any(|n| matches!(n.kind, NodeKind::Store { predicated: true, .. })));
        assert!(g.nodes.iter().any(|n| matches!(n.kind, NodeKind::Control(ControlOp::Select))));
        // the store to `a` must wait for the earlier load of `a`
        assert!(g.nodes.iter().any(|n| matches!(n.kind, NodeKind::SplitJoin)));
    }

    #[test]
    fn intrinsic_in_branch_is_rejected() {
        let src = "global int a[4]; kernel k { v = 1; tagValue<v>(); if (threadIdx.x > 0) { v = fromThreadOrConst<v, -1, 0>(); } a[0] = v; }";
        assert!(matches!(build(src, ThreadSpace::linear(4)), Err(FrontendError::DivergentCommunication { .. })));
    }

    #[test]
    fn delta_out_of_range() {
        let src = "global int a[4]; kernel k { v = 1; tagValue<v>(); a[threadIdx.x] = fromThreadOrConst<v, 4, 0>(); }";
        assert!(matches!(build(src, ThreadSpace::linear(4)), Err(FrontendError::Range { .. })));
    }

    #[test]
    fn lowering_is_deterministic() {
        let a = crate::graph::to_text(&build(CONV, ThreadSpace::linear(32)).unwrap());
        let b = crate::graph::to_text(&build(CONV, ThreadSpace::linear(32)).unwrap());
        assert_eq!(a, b);
    }
}
