use std::collections::BTreeMap;

use crate::scalar::Scalar;

/// Per-unit operand store: tokens wait here, keyed by thread id, until the
/// unit's firing rule is met.
#[derive(Clone, Debug)]
pub struct MatchStore {
    arity: usize,
    slots: BTreeMap<usize, Vec<Option<Scalar>>>,
}

impl MatchStore {
    pub fn new(arity: usize) -> Self {
        Self { arity, slots: BTreeMap::new() }
    }

    /// Returns `false` if the port already holds a token for `tid`.
    pub fn insert(&mut self, port: usize, tid: usize, value: Scalar) -> bool {
        let arity = self.arity;
        let slot = self.slots.entry(tid).or_insert_with(|| vec![None; arity]);
        if slot[port].is_some() {
            return false;
        }
        slot[port] = Some(value);
        true
    }

    pub fn get(&self, tid: usize, port: usize) -> Option<Scalar> {
        self.slots.get(&tid).and_then(|s| s[port])
    }

    /// Thread ids with at least one waiting operand, ascending.
    pub fn tids(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.keys().copied()
    }

    /// Lowest thread id whose operands satisfy `ready`.
    pub fn lowest_and(&self, mut ready: impl FnMut(usize, &[Option<Scalar>]) -> bool) -> Option<usize> {
        self.slots.iter().find(|(&t, ops)| ready(t, ops)).map(|(&t, _)| t)
    }

    /// Lowest thread id with every port present.
    pub fn lowest_complete(&self) -> Option<usize> {
        self.lowest_and(|_, ops| ops.iter().all(Option::is_some))
    }

    /// Removes and returns the given ports of `tid`.
    pub fn take(&mut self, tid: usize, ports: &[usize]) -> Vec<Scalar> {
        let slot = self.slots.get_mut(&tid).expect("tid present");
        let out = ports.iter().map(|&p| slot[p].take().expect("operand present")).collect();
        if slot.iter().all(Option::is_none) {
            self.slots.remove(&tid);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_complete_tid_fires() {
        let mut m = MatchStore::new(2);
        m.insert(0, 3, Scalar::Int(1));
        assert_eq!(m.lowest_complete(), None);
        m.insert(1, 3, Scalar::Int(2));
        m.insert(0, 5, Scalar::Int(9));
        assert_eq!(m.lowest_complete(), Some(3));
        assert_eq!(m.take(3, &[0, 1]), vec![Scalar::Int(1), Scalar::Int(2)]);
        assert_eq!(m.tids().collect::<Vec<_>>(), vec![5]);
        assert!(!m.insert(0, 5, Scalar::Int(0)));
    }
}
