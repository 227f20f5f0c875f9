//! Cycle-level simulation of a placed graph.
//!
//! Each cycle: pending events (token arrivals, buffer credits, memory
//! responses) are applied, one new thread is injected, elevators accept and
//! inject tokens, and then every unit may fire once for its lowest ready tid.
//! With an issue limit, firings stop after `W` per cycle.
//!
//! Trace lines look like
//! `c=12 u=37 n=5 alu.add tid=3 -> 3:7` (or `-> none`); spilled channels use
//! `u=-`.

mod eldst;
mod elevator;
mod matching;
pub mod reference;

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{ControlOp, DataflowGraph, LoadPredicate, NodeId, NodeKind, ThreadSpace, UnitClass};
use crate::mapper::{GridConfig, Mapped, Mapping};
use crate::memsys::{Access, MemError, MemSystem};
use crate::scalar::Scalar;
use crate::stats::{SimStats, UnitFirings};
use crate::ArrayData;

use eldst::{Carried, ELdst, Fire, Forward};
use elevator::Elevator;
use matching::MatchStore;

pub use reference::{reference_run, ReferenceError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimOptions {
    /// Permutes the order in which units are offered issue slots.
    pub seed: Option<u64>,
    /// At most this many unit firings per cycle.
    pub issue_limit: Option<usize>,
    /// Watchdog; defaults to `10 * threads * nodes`, at least 10,000.
    pub max_cycles: Option<u64>,
    /// Cycles between two firings of the same unit.
    pub initiation_interval: u64,
    pub trace: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { seed: None, issue_limit: None, max_cycles: None, initiation_interval: 1, trace: false }
    }
}

/// A unit still holding work when the watchdog fired.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Starved {
    pub node: NodeId,
    pub unit: Option<usize>,
    pub mnemonic: String,
    pub waiting: Vec<usize>,
}

impl fmt::Display for Starved {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = self.unit.map_or("-".to_string(), |u| format!("u{u}"));
        let shown: Vec<String> = self.waiting.iter().take(8).map(ToString::to_string).collect();
        let more = if self.waiting.len() > 8 { ",..." } else { "" };
        write!(f, "{} {} on {} waits for tids [{}{}]", self.node, self.mnemonic, unit, shown.join(","), more)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("deadlock at cycle {cycle}: {}", list(.starved))]
    Deadlock { cycle: u64, starved: Vec<Starved> },
    #[error("memory fault at {node} for tid {tid}: {source}")]
    Memory { node: NodeId, tid: usize, source: MemError },
    #[error("config error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

fn list(starved: &[Starved]) -> String {
    if starved.is_empty() {
        return "no unit holds tokens".into();
    }
    starved.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutput {
    pub arrays: ArrayData,
    pub stats: SimStats,
    pub trace: Vec<String>,
}

/// Simulates an already mapped graph.
pub fn simulate_mapped(m: &Mapped, grid: &GridConfig, inputs: &ArrayData, opts: &SimOptions) -> Result<SimOutput, SimError> {
    let mut out = simulate(&m.graph, &m.mapping, grid, inputs, opts)?;
    out.stats.spills = m.spills;
    Ok(out)
}

/// Runs every thread of `g`'s thread space through the placed graph.
pub fn simulate(
    g: &DataflowGraph,
    mapping: &Mapping,
    grid: &GridConfig,
    inputs: &ArrayData,
    opts: &SimOptions,
) -> Result<SimOutput, SimError> {
    grid.check().map_err(|e| SimError::Config(e.to_string()))?;
    if opts.initiation_interval == 0 {
        return Err(SimError::Config("initiation interval must be at least 1".into()));
    }
    if opts.issue_limit == Some(0) {
        return Err(SimError::Config("issue limit must be at least 1".into()));
    }
    if mapping.assignment.len() != g.len() || mapping.routes.len() != g.edges.len() {
        return Err(SimError::Config("mapping does not belong to this graph".into()));
    }
    let mem = MemSystem::new(grid.memory.clone(), &g.arrays, inputs).map_err(|e| SimError::Config(e.to_string()))?;
    Engine::new(g, mapping, grid, mem, opts).run()
}

#[derive(Clone, Debug)]
enum Event {
    Deliver { node: NodeId, port: usize, tid: usize, value: Scalar },
    Credit { node: NodeId, tid: usize },
    LoadDone { node: NodeId, tid: usize, value: Scalar },
    DupArrive { node: NodeId, target: usize, carried: Carried },
    /// Keeps the watchdog from firing while a memory request is outstanding.
    Tick,
}

enum State {
    Source,
    Plain(MatchStore),
    Elevator(Elevator),
    ELdst { unit: ELdst, spilled: bool },
}

struct Out {
    node: NodeId,
    port: usize,
    latency: u64,
    hops: usize,
}

struct Engine<'a> {
    g: &'a DataflowGraph,
    mapping: &'a Mapping,
    grid: &'a GridConfig,
    opts: &'a SimOptions,
    space: ThreadSpace,
    block: usize,
    outs: Vec<Vec<Out>>,
    /// Per node and input port: whether the producer needs a credit back.
    credit_in: Vec<Vec<Option<NodeId>>>,
    states: Vec<State>,
    events: BTreeMap<u64, Vec<Event>>,
    mem: MemSystem,
    now: u64,
    injected: usize,
    expected_commits: u64,
    commits: u64,
    firings: Vec<u64>,
    last_fire: Vec<Option<u64>>,
    /// Unit-bound nodes in unit index order.
    units: Vec<NodeId>,
    channels: Vec<NodeId>,
    rng: Option<ChaCha8Rng>,
    stats: SimStats,
    trace: Vec<String>,
    progress: bool,
}

impl<'a> Engine<'a> {
    fn new(g: &'a DataflowGraph, mapping: &'a Mapping, grid: &'a GridConfig, mem: MemSystem, opts: &'a SimOptions) -> Self {
        let space = g.space.clone();
        let block = space.block_size();
        let b = grid.token_buffer_capacity;
        let lvc = grid.lvc_latency();
        let channel = |k: &NodeKind| matches!(k, NodeKind::Elevator { .. } | NodeKind::LiveValue { .. });

        let mut outs: Vec<Vec<Out>> = (0..g.len()).map(|_| Vec::new()).collect();
        let mut credit_in: Vec<Vec<Option<NodeId>>> = g.nodes.iter().map(|n| vec![None; n.inputs]).collect();
        for (e, r) in g.edges.iter().zip(&mapping.routes) {
            let credit = channel(&g.node(e.src).kind);
            outs[e.src.0].push(Out { node: e.dst, port: e.dst_port, latency: r.latency, hops: r.hops });
            if credit {
                credit_in[e.dst.0][e.dst_port] = Some(e.src);
            }
        }

        let states = g
            .nodes
            .iter()
            .map(|n| match &n.kind {
                NodeKind::ConstSource(_) | NodeKind::TidSource(_) => State::Source,
                NodeKind::Elevator { comm, constant, stage } => {
                    State::Elevator(Elevator::new(comm.clone(), *stage, *constant, Some(b), 0, b, &space))
                }
                NodeKind::LiveValue { comm, constant } => {
                    let shift = comm.shift(&space).unwrap_or(0);
                    let stage = crate::graph::CascadeStage::whole(shift);
                    State::Elevator(Elevator::new(comm.clone(), stage, *constant, None, lvc, b, &space))
                }
                NodeKind::ELoadStore { comm, spilled, .. } => State::ELdst {
                    unit: ELdst::new(comm.clone(), (!spilled).then_some(b), block),
                    spilled: *spilled,
                },
                _ => State::Plain(MatchStore::new(n.inputs)),
            })
            .collect();

        let mut units: Vec<(usize, NodeId)> =
            g.nodes.iter().filter_map(|n| mapping.assignment[n.id.0].map(|u| (u, n.id))).collect();
        units.sort();
        let channels = g.nodes.iter().filter(|n| matches!(n.kind, NodeKind::LiveValue { .. })).map(|n| n.id).collect();
        let stores = g.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Store { .. })).count();

        let stats = SimStats { threads: block, ..Default::default() };
        Self {
            g,
            mapping,
            grid,
            opts,
            space,
            block,
            outs,
            credit_in,
            states,
            events: BTreeMap::new(),
            mem,
            now: 0,
            injected: 0,
            expected_commits: (stores * block) as u64,
            commits: 0,
            firings: vec![0; g.len()],
            last_fire: vec![None; g.len()],
            units: units.into_iter().map(|(_, n)| n).collect(),
            channels,
            rng: opts.seed.map(ChaCha8Rng::seed_from_u64),
            stats,
            trace: Vec::new(),
            progress: false,
        }
    }

    fn max_cycles(&self) -> u64 {
        self.opts.max_cycles.unwrap_or_else(|| (10 * self.block as u64 * self.g.len() as u64).max(10_000))
    }

    fn schedule(&mut self, at: u64, ev: Event) {
        self.events.entry(at.max(self.now + 1)).or_default().push(ev);
    }

    /// Sends `value` for `tid` to every consumer of `node`, leaving the unit
    /// `delay` cycles after now.
    fn emit(&mut self, node: NodeId, tid: usize, value: Scalar, delay: u64) {
        for k in 0..self.outs[node.0].len() {
            let o = &self.outs[node.0][k];
            let (dst, port, at, hops) = (o.node, o.port, self.now + delay + o.latency, o.hops);
            self.stats.noc_hops += hops as u64;
            self.schedule(at, Event::Deliver { node: dst, port, tid, value });
        }
    }

    fn trace_line(&mut self, node: NodeId, tid: usize, out: Option<(usize, Scalar)>) {
        if !self.opts.trace {
            return;
        }
        let unit = self.mapping.assignment[node.0].map_or("-".to_string(), |u| u.to_string());
        let out = out.map_or("none".to_string(), |(t, v)| format!("{t}:{v}"));
        self.trace.push(format!("c={} u={} n={} {} tid={} -> {}", self.now, unit, node.0, self.g.node(node).kind.mnemonic(), tid, out));
    }

    fn run(mut self) -> Result<SimOutput, SimError> {
        let limit = self.max_cycles();
        let mut finished_at: Option<u64> = None;
        let mut last_progress = 0;
        loop {
            self.progress = false;
            self.apply_events()?;
            self.inject();
            self.prepare_channels();
            self.fire_units()?;
            self.check_buffers()?;
            if self.progress {
                last_progress = self.now;
            }
            let stores_done = self.injected == self.block && self.commits == self.expected_commits;
            if self.expected_commits > 0 && stores_done && finished_at.is_none() {
                finished_at = Some(self.now);
            }
            let quiet = self.events.is_empty() && !self.progress;
            if quiet && self.injected == self.block {
                if self.expected_commits == 0 {
                    finished_at = Some(last_progress);
                }
                match finished_at {
                    Some(_) => break,
                    None => return Err(self.deadlock()),
                }
            }
            if self.now >= limit {
                if finished_at.is_some() {
                    break;
                }
                return Err(self.deadlock());
            }
            self.now += 1;
        }
        self.stats.cycles = finished_at.map_or(0, |c| c + 1);
        Ok(self.finish())
    }

    fn apply_events(&mut self) -> Result<(), SimError> {
        while let Some(entry) = self.events.first_entry() {
            if *entry.key() > self.now {
                break;
            }
            for ev in entry.remove() {
                self.progress = true;
                self.apply(ev)?;
            }
        }
        Ok(())
    }

    fn apply(&mut self, ev: Event) -> Result<(), SimError> {
        match ev {
            Event::Deliver { node, port, tid, value } => {
                let fresh = match &mut self.states[node.0] {
                    State::Plain(m) => m.insert(port, tid, value),
                    State::Elevator(e) => e.deliver(tid, value),
                    State::ELdst { unit, .. } => unit.inputs.insert(port, tid, value),
                    State::Source => false,
                };
                if !fresh {
                    return Err(SimError::Internal(format!("two tokens for tid {tid} at {node} port {port}")));
                }
            }
            Event::Credit { node, tid } => {
                if let State::Elevator(e) = &mut self.states[node.0] {
                    e.release(tid);
                }
            }
            Event::LoadDone { node, tid, value } => {
                let State::ELdst { unit, spilled } = &mut self.states[node.0] else {
                    return Err(SimError::Internal(format!("load response for {node}")));
                };
                let spilled = *spilled;
                let carried = unit.loaded_value(value);
                let fwd = unit.forward(tid, carried, &self.space, spilled);
                self.emit(node, tid, value, 0);
                self.account_forward(node, fwd, carried);
            }
            Event::DupArrive { node, target, carried } => {
                if let State::ELdst { unit, .. } = &mut self.states[node.0] {
                    if !unit.arrive(target, carried) {
                        self.stats.redundant_drops += 1;
                    }
                }
            }
            Event::Tick => {}
        }
        Ok(())
    }

    fn account_forward(&mut self, node: NodeId, fwd: Forward, carried: Carried) {
        match fwd {
            Forward::Kept => {}
            Forward::Boundary => self.stats.boundary_drops += 1,
            Forward::Redundant => self.stats.redundant_drops += 1,
            Forward::Spill(target) => {
                self.stats.lvc_accesses += 2;
                let at = self.now + self.grid.lvc_latency();
                self.schedule(at, Event::DupArrive { node, target, carried });
            }
        }
    }

    fn inject(&mut self) {
        if self.injected >= self.block {
            return;
        }
        let tid = self.injected;
        let g = self.g;
        for n in &g.nodes {
            let value = match &n.kind {
                NodeKind::ConstSource(v) => *v,
                NodeKind::TidSource(axis) => Scalar::Int(self.space.coord(tid, *axis) as i64),
                _ => continue,
            };
            self.emit(n.id, tid, value.cast(n.ty), 0);
        }
        self.injected += 1;
        self.stats.injected_threads = self.injected;
        self.progress = true;
    }

    /// Elevator acceptance and constant injection, plus eLDST duplicate
    /// queue draining. None of these are unit firings.
    fn prepare_channels(&mut self) {
        for k in 0..self.states.len() {
            match &mut self.states[k] {
                State::Elevator(e) => {
                    let c = e.prepare(self.now, self.injected, &self.space, k);
                    if c != Default::default() {
                        self.progress = true;
                    }
                    if let (Some(tid), Some(src)) = (c.taken, self.credit_in[k][0]) {
                        self.events.entry(self.now + 1).or_default().push(Event::Credit { node: src, tid });
                    }
                    if e.capacity().is_none() {
                        self.stats.lvc_accesses += 2 * (c.accepted - c.drops);
                    }
                    self.stats.constant_injections += c.constants;
                    self.stats.boundary_drops += c.drops;
                }
                State::ELdst { unit, .. } => {
                    let before = unit.waiting().len();
                    let redundant = unit.drain();
                    self.stats.redundant_drops += redundant;
                    if redundant > 0 || unit.waiting().len() != before {
                        self.progress = true;
                    }
                }
                _ => {}
            }
        }
    }

    fn fire_units(&mut self) -> Result<(), SimError> {
        for k in 0..self.channels.len() {
            let node = self.channels[k];
            self.pop_channel(node);
        }
        let mut order: Vec<usize> = (0..self.units.len()).collect();
        match &mut self.rng {
            Some(rng) => order.shuffle(rng),
            None if !order.is_empty() => {
                let start = (self.now % order.len() as u64) as usize;
                order.rotate_left(start);
            }
            None => {}
        }
        let mut budget = self.opts.issue_limit.unwrap_or(usize::MAX);
        for k in order {
            if budget == 0 {
                break;
            }
            let node = self.units[k];
            if let Some(last) = self.last_fire[node.0] {
                if self.now < last + self.opts.initiation_interval {
                    continue;
                }
            }
            if self.fire(node)? {
                budget -= 1;
                self.progress = true;
                self.firings[node.0] += 1;
                self.last_fire[node.0] = Some(self.now);
            }
        }
        Ok(())
    }

    fn pop_channel(&mut self, node: NodeId) -> bool {
        let consumers = self.outs[node.0].len();
        let State::Elevator(e) = &mut self.states[node.0] else { return false };
        let Some((tid, value, constant)) = e.pop(self.now, consumers, node.0) else { return false };
        if !constant && e.capacity().is_some() {
            self.stats.retags += 1;
        }
        self.progress = true;
        self.emit(node, tid, value, 1);
        self.trace_line(node, tid, Some((tid, value)));
        true
    }

    /// Credits elevators whose tokens `node` just consumed for `tid`.
    fn consume_credits(&mut self, node: NodeId, tid: usize, ports: &[usize]) {
        for &p in ports {
            if let Some(src) = self.credit_in[node.0][p] {
                let at = self.now + 1;
                self.schedule(at, Event::Credit { node: src, tid });
            }
        }
    }

    fn fire(&mut self, node: NodeId) -> Result<bool, SimError> {
        let g = self.g;
        let n = g.node(node);
        let class = n.kind.unit_class().expect("placed nodes have a class");
        let latency = self.grid.latency_of(class);
        match &n.kind {
            NodeKind::Elevator { .. } => Ok(self.pop_channel(node)),
            NodeKind::ELoadStore { array, .. } => self.fire_eldst(node, array),
            NodeKind::Control(ControlOp::Merge) => {
                let State::Plain(m) = &mut self.states[node.0] else { unreachable!() };
                let Some(tid) = m.lowest_and(|_, ops| match ops[0] {
                    Some(sel) => ops[if sel.truthy() { 1 } else { 2 }].is_some(),
                    None => false,
                }) else {
                    return Ok(false);
                };
                let port = if m.get(tid, 0).is_some_and(Scalar::truthy) { 1 } else { 2 };
                let v = m.take(tid, &[0, port])[1].cast(n.ty);
                self.consume_credits(node, tid, &[0, port]);
                self.emit(node, tid, v, latency);
                self.trace_line(node, tid, Some((tid, v)));
                Ok(true)
            }
            NodeKind::Control(ControlOp::GateFalse) => {
                let Some((tid, ops)) = self.take_complete(node) else { return Ok(false) };
                let out = (!ops[0].truthy()).then(|| ops[1].cast(n.ty));
                if let Some(v) = out {
                    self.emit(node, tid, v, latency);
                }
                self.trace_line(node, tid, out.map(|v| (tid, v)));
                Ok(true)
            }
            NodeKind::Load { array, pred } => {
                let State::Plain(m) = &self.states[node.0] else { unreachable!() };
                let Some(tid) = m.lowest_complete() else { return Ok(false) };
                let addr = m.get(tid, 0).expect("complete").as_int();
                let enabled = *pred == LoadPredicate::None || m.get(tid, 1).expect("complete").truthy();
                if enabled && !self.mem.can_accept(array, addr, self.now) {
                    return Ok(false);
                }
                self.take_complete(node);
                if !enabled {
                    let out = (*pred == LoadPredicate::ZeroIfFalse).then(|| n.ty.zero());
                    if let Some(v) = out {
                        self.emit(node, tid, v, 1);
                    }
                    self.trace_line(node, tid, out.map(|v| (tid, v)));
                    return Ok(true);
                }
                let r = self.access(node, tid, array, addr, Access::Load)?;
                let v = r.value.expect("load value").cast(n.ty);
                self.emit(node, tid, v, r.latency);
                self.trace_line(node, tid, Some((tid, v)));
                Ok(true)
            }
            NodeKind::Store { array, predicated } => {
                let State::Plain(m) = &self.states[node.0] else { unreachable!() };
                let Some(tid) = m.lowest_complete() else { return Ok(false) };
                let addr = m.get(tid, 0).expect("complete").as_int();
                let enabled = !*predicated || m.get(tid, 2).expect("complete").truthy();
                if enabled && !self.mem.can_accept(array, addr, self.now) {
                    return Ok(false);
                }
                let (_, ops) = self.take_complete(node).expect("complete");
                let done = if enabled { self.access(node, tid, array, addr, Access::Store(ops[1]))?.latency } else { 1 };
                self.commits += 1;
                self.emit(node, tid, ops[1], done);
                self.trace_line(node, tid, enabled.then_some((tid, ops[1])));
                Ok(true)
            }
            _ => {
                let Some((tid, ops)) = self.take_complete(node) else { return Ok(false) };
                let v = crate::graph::eval::evaluate(&n.kind, n.ty, &ops)
                    .ok_or_else(|| SimError::Internal(format!("{} cannot be evaluated", node)))?;
                self.emit(node, tid, v, latency);
                self.trace_line(node, tid, Some((tid, v)));
                Ok(true)
            }
        }
    }

    fn take_complete(&mut self, node: NodeId) -> Option<(usize, Vec<Scalar>)> {
        let State::Plain(m) = &mut self.states[node.0] else { return None };
        let tid = m.lowest_complete()?;
        let ports: Vec<usize> = (0..self.g.node(node).inputs).collect();
        let ops = m.take(tid, &ports);
        self.consume_credits(node, tid, &ports);
        Some((tid, ops))
    }

    fn access(&mut self, node: NodeId, tid: usize, array: &str, addr: i64, op: Access) -> Result<crate::memsys::Response, SimError> {
        let r = self.mem.access(array, addr, op, self.now).map_err(|source| SimError::Memory { node, tid, source })?;
        if self.mem.config().mshr_limit.is_some() {
            let at = self.now + r.latency;
            self.schedule(at, Event::Tick);
        }
        Ok(r)
    }

    fn fire_eldst(&mut self, node: NodeId, array: &str) -> Result<bool, SimError> {
        let State::ELdst { unit, spilled } = &mut self.states[node.0] else { unreachable!() };
        let Some(tid) = unit.ready() else { return Ok(false) };
        let spilled = *spilled;
        let addr = unit.inputs.get(tid, 0).expect("ready").as_int();
        let enabled = unit.inputs.get(tid, 1).expect("ready").truthy();
        if enabled && !self.mem.can_accept(array, addr, self.now) {
            return Ok(false);
        }
        match unit.fire(tid) {
            Fire::Load { dropped, .. } => {
                if dropped {
                    self.stats.redundant_drops += 1;
                }
                self.consume_credits(node, tid, &[0, 1]);
                let r = self.access(node, tid, array, addr, Access::Load)?;
                let v = r.value.expect("load value").cast(self.g.node(node).ty);
                let at = self.now + r.latency;
                self.schedule(at, Event::LoadDone { node, tid, value: v });
                self.trace_line(node, tid, Some((tid, v)));
            }
            Fire::Forward { carried, .. } => {
                let fwd = unit.forward(tid, carried, &self.space, spilled);
                self.consume_credits(node, tid, &[0, 1]);
                self.emit(node, tid, carried.value, 1);
                self.account_forward(node, fwd, carried);
                self.trace_line(node, tid, Some((tid, carried.value)));
            }
        }
        Ok(true)
    }

    fn check_buffers(&self) -> Result<(), SimError> {
        for (k, s) in self.states.iter().enumerate() {
            let (occ, cap) = match s {
                State::Elevator(e) => (e.occupancy(), e.capacity()),
                State::ELdst { unit, .. } => (unit.occupancy(), unit.capacity()),
                _ => continue,
            };
            if let Some(cap) = cap {
                if occ > cap {
                    return Err(SimError::Internal(format!("n{k} holds {occ} tokens, capacity {cap}")));
                }
            }
        }
        Ok(())
    }

    fn deadlock(&self) -> SimError {
        let mut starved = Vec::new();
        for (k, s) in self.states.iter().enumerate() {
            let waiting: Vec<usize> = match s {
                State::Plain(m) => m.tids().collect(),
                State::Elevator(e) => e.waiting(),
                State::ELdst { unit, .. } => unit.waiting(),
                State::Source => Vec::new(),
            };
            if !waiting.is_empty() {
                starved.push(Starved {
                    node: NodeId(k),
                    unit: self.mapping.assignment[k],
                    mnemonic: self.g.nodes[k].kind.mnemonic(),
                    waiting,
                });
            }
        }
        SimError::Deadlock { cycle: self.now, starved }
    }

    fn finish(mut self) -> SimOutput {
        let cycles = self.stats.cycles.max(1);
        let g = self.g;
        for n in &g.nodes {
            let Some(class) = n.kind.unit_class() else { continue };
            let f = self.firings[n.id.0];
            self.stats.total_firings += f;
            *self.stats.firings_by_class.entry(class.name().to_string()).or_default() += f;
            if let Some(unit) = self.mapping.assignment[n.id.0] {
                self.stats.units.push(UnitFirings {
                    node: n.id.0,
                    unit,
                    class: class.name().to_string(),
                    firings: f,
                    utilization: f as f64 / cycles as f64,
                });
            }
        }
        for class in UnitClass::ALL {
            self.stats.firings_by_class.entry(class.name().to_string()).or_default();
        }
        for s in &self.states {
            match s {
                State::Elevator(e) => {
                    self.stats.audit.extend(e.audit().cloned());
                    if e.capacity().is_some() {
                        self.stats.max_buffer_occupancy = self.stats.max_buffer_occupancy.max(e.max_occupancy);
                    }
                }
                State::ELdst { unit, .. } => {
                    if unit.capacity().is_some() {
                        self.stats.max_buffer_occupancy = self.stats.max_buffer_occupancy.max(unit.max_occupancy);
                    }
                    for &served in &unit.served {
                        *self.stats.reuse_histogram.entry(served.to_string()).or_default() += 1;
                    }
                }
                _ => {}
            }
        }
        let (arrays, memory) = self.mem.into_parts();
        self.stats.memory = memory;
        SimOutput { arrays, stats: self.stats, trace: self.trace }
    }
}

#[cfg(test)]
mod tests;
