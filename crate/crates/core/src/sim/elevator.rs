use std::collections::BTreeMap;

use crate::graph::{CascadeStage, CommPattern, ThreadSpace};
use crate::scalar::Scalar;
use crate::stats::AuditRow;

#[derive(Clone, Debug)]
struct Slot {
    value: Scalar,
    emitted: bool,
    /// Consumers that have not yet consumed the emitted token.
    refs: usize,
    ready_at: u64,
    group: usize,
    constant: bool,
}

/// An elevator (or a live-value-cache channel when `capacity` is `None`).
///
/// Slots are keyed by the tid a token is destined for and stay occupied
/// until every consumer has taken the token.
#[derive(Clone, Debug)]
pub struct Elevator {
    comm: CommPattern,
    stage: CascadeStage,
    constant: Scalar,
    capacity: Option<usize>,
    delay: u64,
    /// Retag applied by earlier cascade stages.
    prior: i64,
    input: BTreeMap<usize, Scalar>,
    buffer: BTreeMap<usize, Slot>,
    const_targets: Vec<usize>,
    next_const: usize,
    audit: BTreeMap<usize, AuditRow>,
    pub max_occupancy: usize,
}

/// Counter deltas from one elevator step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepCounts {
    pub accepted: u64,
    pub constants: u64,
    pub drops: u64,
    /// Input tid taken off the channel this step, if any.
    pub taken: Option<usize>,
}

impl Elevator {
    pub fn new(
        comm: CommPattern,
        stage: CascadeStage,
        constant: Scalar,
        capacity: Option<usize>,
        delay: u64,
        stage_span: usize,
        space: &ThreadSpace,
    ) -> Self {
        let const_targets = if stage.injects_constants() {
            (0..space.block_size()).filter(|&r| comm.source_of(r, space).is_none()).collect()
        } else {
            Vec::new()
        };
        let prior = stage.index as i64 * stage_span as i64 * stage.retag.signum();
        Self {
            comm,
            stage,
            constant,
            capacity,
            delay,
            prior,
            input: BTreeMap::new(),
            buffer: BTreeMap::new(),
            const_targets,
            next_const: 0,
            audit: BTreeMap::new(),
            max_occupancy: 0,
        }
    }

    pub fn occupancy(&self) -> usize {
        self.buffer.len()
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    fn has_room(&self) -> bool {
        self.capacity.is_none_or(|c| self.buffer.len() < c)
    }

    fn group(&self, tid: usize) -> usize {
        tid / self.comm.window.max(1)
    }

    fn row(&mut self, group: usize, node: usize) -> &mut AuditRow {
        self.audit.entry(group).or_insert_with(|| AuditRow { node, group, ..Default::default() })
    }

    /// Returns `false` on a duplicate arrival.
    pub fn deliver(&mut self, tid: usize, value: Scalar) -> bool {
        self.input.insert(tid, value).is_none()
    }

    /// Constant injection and input acceptance for one cycle. `injected` is
    /// the number of threads injected so far.
    pub fn prepare(&mut self, now: u64, injected: usize, space: &ThreadSpace, node: usize) -> StepCounts {
        let mut counts = StepCounts::default();
        if let Some(&r) = self.const_targets.get(self.next_const) {
            if r < injected && self.has_room() {
                let group = self.group(r);
                self.buffer.insert(
                    r,
                    Slot { value: self.constant, emitted: false, refs: 0, ready_at: now, group, constant: true },
                );
                self.next_const += 1;
                self.row(group, node).constants += 1;
                counts.constants += 1;
            }
        }
        if let Some((&t, &value)) = self.input.iter().next() {
            let source = (t as i64 - self.prior) as usize;
            let group = self.group(source);
            if self.stage.filters_targets() && self.comm.target_of(source, space).is_none() {
                self.input.remove(&t);
                let row = self.row(group, node);
                row.received += 1;
                row.drops += 1;
                counts.drops += 1;
                counts.accepted += 1;
                counts.taken = Some(t);
            } else if self.has_room() {
                self.input.remove(&t);
                let target = (t as i64 + self.stage.retag) as usize;
                let slot = Slot { value, emitted: false, refs: 0, ready_at: now + self.delay, group, constant: false };
                let clash = self.buffer.insert(target, slot);
                debug_assert!(clash.is_none(), "two tokens for tid {target}");
                self.row(group, node).received += 1;
                counts.accepted += 1;
                counts.taken = Some(t);
            }
        }
        self.max_occupancy = self.max_occupancy.max(self.buffer.len());
        counts
    }

    /// Emits the lowest-tid ready token. `consumers` is the number of
    /// downstream ports that will consume it. Returns `(tid, value, is_constant)`.
    pub fn pop(&mut self, now: u64, consumers: usize, node: usize) -> Option<(usize, Scalar, bool)> {
        let (&tid, slot) = self.buffer.iter_mut().find(|(_, s)| !s.emitted && s.ready_at <= now)?;
        slot.emitted = true;
        slot.refs = consumers;
        let out = (tid, slot.value, slot.constant);
        let group = slot.group;
        if consumers == 0 {
            self.buffer.remove(&tid);
        }
        self.row(group, node).emitted += 1;
        Some(out)
    }

    /// One consumer took the token for `tid`.
    pub fn release(&mut self, tid: usize) {
        if let Some(slot) = self.buffer.get_mut(&tid) {
            slot.refs = slot.refs.saturating_sub(1);
            if slot.emitted && slot.refs == 0 {
                self.buffer.remove(&tid);
            }
        }
    }

    pub fn waiting(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.input.keys().copied().collect();
        v.extend(self.buffer.iter().filter(|(_, s)| !s.emitted).map(|(&t, _)| t));
        v.extend(self.const_targets[self.next_const..].iter().copied());
        v.sort();
        v.dedup();
        v
    }

    pub fn audit(&self) -> impl Iterator<Item = &AuditRow> {
        self.audit.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TidDelta;

    fn elevator(offset: i64, window: usize, n: usize, cap: usize) -> (Elevator, ThreadSpace) {
        let space = ThreadSpace::linear(n);
        let comm = CommPattern::new(TidDelta::linear(offset), window);
        let e = Elevator::new(comm, CascadeStage::whole(-offset), Scalar::Int(0), Some(cap), 0, cap, &space);
        (e, space)
    }

    #[test]
    fn forwards_and_injects() {
        let (mut e, space) = elevator(-1, 2, 2, 16);
        e.deliver(0, Scalar::Int(5));
        e.prepare(0, 1, &space, 0);
        // thread 0 gets the constant, thread 1 gets 5
        assert_eq!(e.pop(0, 1, 0), Some((0, Scalar::Int(0), true)));
        assert_eq!(e.pop(0, 1, 0), Some((1, Scalar::Int(5), false)));
        assert_eq!(e.occupancy(), 2);
        e.release(0);
        e.release(1);
        assert_eq!(e.occupancy(), 0);
    }

    #[test]
    fn window_boundaries() {
        let (mut e, space) = elevator(-1, 4, 8, 16);
        for t in 0..8 {
            e.deliver(t, Scalar::Int(t as i64 + 10));
        }
        let mut got = Vec::new();
        for c in 0..20 {
            e.prepare(c, 8, &space, 0);
            while let Some(x) = e.pop(c, 0, 0) {
                got.push(x);
            }
        }
        got.sort_by_key(|x| x.0);
        let values: Vec<i64> = got.iter().map(|x| x.1.as_int()).collect();
        assert_eq!(values, vec![0, 10, 11, 12, 0, 14, 15, 16]);
        assert!(e.audit().all(|r| r.imbalance() == 0));
        let drops: u64 = e.audit().map(|r| r.drops).sum();
        assert_eq!(drops, 2);
    }

    #[test]
    fn full_buffer_backpressures() {
        let (mut e, space) = elevator(-4, 16, 16, 2);
        for t in 0..4 {
            e.deliver(t, Scalar::Int(1));
        }
        e.prepare(0, 0, &space, 0);
        e.prepare(1, 0, &space, 0);
        e.prepare(2, 0, &space, 0);
        assert_eq!(e.occupancy(), 2);
        assert_eq!(e.max_occupancy, 2);
        // inputs 2,3; unemitted 4,5; constants still owed to 0..4
        assert_eq!(e.waiting(), vec![0, 1, 2, 3, 4, 5]);
    }
}
