use std::collections::{BTreeMap, VecDeque};

use crate::graph::{CommPattern, ThreadSpace};
use crate::scalar::Scalar;

use super::matching::MatchStore;

/// A value loaded (or forwarded) by an eLDST, with the id of the original
/// load so reuse can be counted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Carried {
    pub value: Scalar,
    pub load: usize,
}

/// What to do with a duplicate after a firing or a load response.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Forward {
    /// Buffered (or queued behind a full buffer) for the target thread.
    Kept,
    /// Sent through the live value cache; arrives after the spill latency.
    Spill(usize),
    /// Target thread lies outside the window or the block.
    Boundary,
    /// Target thread already loaded for itself.
    Redundant,
}

/// Load-or-forward unit state. Inputs are `(addr, enable)`.
#[derive(Clone, Debug)]
pub struct ELdst {
    comm: CommPattern,
    capacity: Option<usize>,
    pub inputs: MatchStore,
    dups: BTreeMap<usize, Carried>,
    pending: VecDeque<(usize, Carried)>,
    /// Threads whose enable was true and that already loaded.
    loaded: Vec<bool>,
    /// Threads served per load id.
    pub served: Vec<u64>,
    pub max_occupancy: usize,
}

/// The firing chosen for one cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fire {
    /// Enable true: issue a load at `addr`. `dropped` is true when a
    /// buffered duplicate was discarded as redundant.
    Load { tid: usize, addr: i64, dropped: bool },
    /// Enable false: emit the buffered duplicate.
    Forward { tid: usize, carried: Carried },
}

impl ELdst {
    pub fn new(comm: CommPattern, capacity: Option<usize>, block: usize) -> Self {
        Self {
            comm,
            capacity,
            inputs: MatchStore::new(2),
            dups: BTreeMap::new(),
            pending: VecDeque::new(),
            loaded: vec![false; block],
            served: Vec::new(),
            max_occupancy: 0,
        }
    }

    pub fn occupancy(&self) -> usize {
        self.dups.len()
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    fn has_room(&self) -> bool {
        self.capacity.is_none_or(|c| self.dups.len() < c)
    }

    /// Lowest tid that can fire now.
    pub fn ready(&self) -> Option<usize> {
        self.inputs.lowest_and(|tid, ops| match (ops[0], ops[1]) {
            (Some(_), Some(en)) => en.truthy() || self.dups.contains_key(&tid),
            _ => false,
        })
    }

    /// Consumes the operands of `tid` and decides the action.
    pub fn fire(&mut self, tid: usize) -> Fire {
        let ops = self.inputs.take(tid, &[0, 1]);
        if ops[1].truthy() {
            self.loaded[tid] = true;
            let dropped = self.dups.remove(&tid).is_some();
            Fire::Load { tid, addr: ops[0].as_int(), dropped }
        } else {
            let carried = self.dups.remove(&tid).expect("ready checked the duplicate");
            self.served[carried.load] += 1;
            Fire::Forward { tid, carried }
        }
    }

    /// Registers a completed load and returns its id.
    pub fn loaded_value(&mut self, value: Scalar) -> Carried {
        self.served.push(1);
        Carried { value, load: self.served.len() - 1 }
    }

    /// Passes a value on to the next thread in the pattern.
    pub fn forward(&mut self, tid: usize, carried: Carried, space: &ThreadSpace, spilled: bool) -> Forward {
        let Some(target) = self.comm.target_of(tid, space) else { return Forward::Boundary };
        if self.loaded[target] {
            return Forward::Redundant;
        }
        if spilled {
            return Forward::Spill(target);
        }
        self.pending.push_back((target, carried));
        self.drain();
        Forward::Kept
    }

    /// A spilled duplicate came back from the live value cache.
    pub fn arrive(&mut self, target: usize, carried: Carried) -> bool {
        if self.loaded[target] {
            return false;
        }
        self.dups.insert(target, carried);
        self.max_occupancy = self.max_occupancy.max(self.dups.len());
        true
    }

    /// Moves queued duplicates into free buffer slots. Returns the number
    /// of duplicates that became redundant while queued.
    pub fn drain(&mut self) -> u64 {
        let mut redundant = 0;
        while let Some(&(target, carried)) = self.pending.front() {
            if self.loaded[target] {
                self.pending.pop_front();
                redundant += 1;
                continue;
            }
            if !self.has_room() {
                break;
            }
            self.pending.pop_front();
            self.dups.insert(target, carried);
        }
        self.max_occupancy = self.max_occupancy.max(self.dups.len());
        redundant
    }

    pub fn waiting(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.inputs.tids().collect();
        v.extend(self.pending.iter().map(|p| p.0));
        v.sort();
        v.dedup();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TidDelta;

    #[test]
    fn loads_once_then_forwards() {
        let space = ThreadSpace::linear(4);
        let mut e = ELdst::new(CommPattern::new(TidDelta::linear(-1), 4), Some(16), 4);
        for t in 0..4 {
            e.inputs.insert(0, t, Scalar::Int(7));
            e.inputs.insert(1, t, Scalar::from_bool(t == 0));
        }
        assert_eq!(e.ready(), Some(0));
        assert!(matches!(e.fire(0), Fire::Load { tid: 0, addr: 7, dropped: false }));
        // thread 1 waits for the duplicate
        assert_eq!(e.ready(), None);
        let c = e.loaded_value(Scalar::Float(2.5));
        assert_eq!(e.forward(0, c, &space, false), Forward::Kept);
        for t in 1..4 {
            assert_eq!(e.ready(), Some(t));
            let Fire::Forward { carried, .. } = e.fire(t) else { panic!() };
            assert_eq!(carried.value, Scalar::Float(2.5));
            let expect = if t == 3 { Forward::Boundary } else { Forward::Kept };
            assert_eq!(e.forward(t, carried, &space, false), expect);
        }
        assert_eq!(e.served, vec![4]);
        assert!(e.waiting().is_empty());
    }

    #[test]
    fn duplicate_to_loading_thread_is_redundant() {
        let space = ThreadSpace::linear(2);
        let mut e = ELdst::new(CommPattern::new(TidDelta::linear(-1), 2), Some(1), 2);
        for t in 0..2 {
            e.inputs.insert(0, t, Scalar::Int(t as i64));
            e.inputs.insert(1, t, Scalar::from_bool(true));
        }
        e.fire(0);
        e.fire(1);
        let c = e.loaded_value(Scalar::Int(1));
        assert_eq!(e.forward(0, c, &space, false), Forward::Redundant);
    }
}
