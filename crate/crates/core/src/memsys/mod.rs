//! Two-level set-associative cache hierarchy in front of DRAM.
//!
//! The memory system owns the functional array contents: caches only decide
//! latency and counters, so results never depend on cache parameters.

mod cache;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{Cache, Lookup};

use crate::graph::ArrayDecl;
use crate::scalar::{Scalar, ValueType};
use crate::ArrayData;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MemError {
    #[error("index {index} out of range for array `{array}` of length {len}")]
    OutOfRange { array: String, index: i64, len: usize },
    #[error("unknown array `{0}`")]
    UnknownArray(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("input for array `{array}` has {got} elements, expected {expected}")]
    InputSize { array: String, got: usize, expected: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheConfig {
    pub size_bytes: usize,
    pub line_bytes: usize,
    pub ways: usize,
    pub banks: usize,
    pub hit_latency: u64,
}

impl CacheConfig {
    pub fn sets(&self) -> usize {
        self.size_bytes / (self.line_bytes * self.ways)
    }

    fn check(&self, level: &str) -> Result<(), MemError> {
        if self.line_bytes == 0 || self.ways == 0 || self.banks == 0 {
            return Err(MemError::Parameter(format!("{level}: line_bytes, ways and banks must be positive")));
        }
        if self.sets() == 0 {
            return Err(MemError::Parameter(format!("{level}: size must hold at least one set")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DramConfig {
    pub latency: u64,
    pub banks: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WritePolicy {
    WriteBackAllocate,
    WriteThroughNoAllocate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemConfig {
    pub l1: CacheConfig,
    pub l2: CacheConfig,
    pub dram: DramConfig,
    pub write_policy: WritePolicy,
    pub element_bytes: usize,
    /// Serialize same-bank L1 accesses issued in the same cycle.
    pub bank_conflicts: bool,
    /// Cap on outstanding L1 misses; `None` is unlimited.
    pub mshr_limit: Option<usize>,
}

impl Default for MemConfig {
    fn default() -> Self {
        Self {
            l1: CacheConfig { size_bytes: 64 * 1024, line_bytes: 128, ways: 4, banks: 32, hit_latency: 4 },
            l2: CacheConfig { size_bytes: 786 * 1024, line_bytes: 128, ways: 16, banks: 6, hit_latency: 20 },
            dram: DramConfig { latency: 100, banks: 8 },
            write_policy: WritePolicy::WriteBackAllocate,
            element_bytes: 8,
            bank_conflicts: false,
            mshr_limit: None,
        }
    }
}

impl MemConfig {
    pub fn check(&self) -> Result<(), MemError> {
        self.l1.check("l1")?;
        self.l2.check("l2")?;
        if self.element_bytes == 0 {
            return Err(MemError::Parameter("element_bytes must be positive".into()));
        }
        if self.mshr_limit == Some(0) {
            return Err(MemError::Parameter("mshr_limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemStats {
    pub loads: u64,
    pub stores: u64,
    pub l1_hits: u64,
    pub l1_misses: u64,
    pub l2_hits: u64,
    pub l2_misses: u64,
    pub dram_accesses: u64,
    pub l1_writebacks: u64,
    pub l2_writebacks: u64,
    pub bank_conflicts: u64,
    pub per_array_loads: BTreeMap<String, u64>,
    pub per_array_stores: BTreeMap<String, u64>,
}

impl MemStats {
    pub fn l1_accesses(&self) -> u64 {
        self.l1_hits + self.l1_misses
    }

    pub fn l2_accesses(&self) -> u64 {
        self.l2_hits + self.l2_misses
    }
}

/// Element-load requests issued to `array` before any cache filtering.
pub fn per_array_load_count(stats: &MemStats, array: &str) -> Result<u64, MemError> {
    stats.per_array_loads.get(array).copied().ok_or_else(|| MemError::UnknownArray(array.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Access {
    Load,
    Store(Scalar),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Response {
    /// Loaded value; `None` for stores.
    pub value: Option<Scalar>,
    pub latency: u64,
}

#[derive(Clone, Debug)]
struct Region {
    name: String,
    base: u64,
    ty: ValueType,
    len: usize,
}

#[derive(Clone, Debug)]
pub struct MemSystem {
    config: MemConfig,
    regions: Vec<Region>,
    data: ArrayData,
    l1: Cache,
    l2: Cache,
    stats: MemStats,
    bank_cycle: u64,
    banks_used: Vec<u32>,
    outstanding: Vec<u64>,
}

impl MemSystem {
    /// Lays out arrays line-aligned in declaration order and loads their
    /// initial contents; missing inputs start zeroed.
    pub fn new(config: MemConfig, arrays: &[ArrayDecl], inputs: &ArrayData) -> Result<Self, MemError> {
        config.check()?;
        let line = config.l1.line_bytes.max(config.l2.line_bytes) as u64;
        let mut regions = Vec::new();
        let mut data = ArrayData::new();
        let mut next = 0u64;
        let mut stats = MemStats::default();
        for a in arrays {
            let len = a.len();
            let init = match inputs.get(&a.name) {
                Some(v) if v.len() != len => {
                    return Err(MemError::InputSize { array: a.name.clone(), got: v.len(), expected: len })
                }
                Some(v) => v.iter().map(|s| s.cast(a.ty)).collect(),
                None => vec![a.ty.zero(); len],
            };
            data.insert(a.name.clone(), init);
            regions.push(Region { name: a.name.clone(), base: next, ty: a.ty, len });
            stats.per_array_loads.insert(a.name.clone(), 0);
            stats.per_array_stores.insert(a.name.clone(), 0);
            let bytes = (len * config.element_bytes) as u64;
            next += bytes.div_ceil(line).max(1) * line;
        }
        for name in inputs.keys() {
            if !data.contains_key(name) {
                return Err(MemError::UnknownArray(name.clone()));
            }
        }
        let l1 = Cache::new(&config.l1);
        let l2 = Cache::new(&config.l2);
        let banks = config.l1.banks;
        Ok(Self { config, regions, data, l1, l2, stats, bank_cycle: 0, banks_used: vec![0; banks], outstanding: Vec::new() })
    }

    pub fn config(&self) -> &MemConfig {
        &self.config
    }

    pub fn stats(&self) -> &MemStats {
        &self.stats
    }

    pub fn data(&self) -> &ArrayData {
        &self.data
    }

    pub fn into_parts(self) -> (ArrayData, MemStats) {
        (self.data, self.stats)
    }

    pub fn base_address(&self, array: &str) -> Option<u64> {
        self.regions.iter().find(|r| r.name == array).map(|r| r.base)
    }

    fn region(&self, array: &str, index: i64) -> Result<(usize, u64), MemError> {
        let (k, r) = self
            .regions
            .iter()
            .enumerate()
            .find(|(_, r)| r.name == array)
            .ok_or_else(|| MemError::UnknownArray(array.to_string()))?;
        if index < 0 || index as usize >= r.len {
            return Err(MemError::OutOfRange { array: array.to_string(), index, len: r.len });
        }
        Ok((k, r.base + index as u64 * self.config.element_bytes as u64))
    }

    /// Whether a request issued at `cycle` could be accepted now; only an
    /// MSHR cap can refuse one.
    pub fn can_accept(&mut self, array: &str, index: i64, cycle: u64) -> bool {
        let Some(limit) = self.config.mshr_limit else { return true };
        self.outstanding.retain(|&done| done > cycle);
        if self.outstanding.len() < limit {
            return true;
        }
        match self.region(array, index) {
            Ok((_, addr)) => self.l1.probe(addr / self.config.l1.line_bytes as u64),
            Err(_) => true,
        }
    }

    /// Performs one element access at `cycle`, updating caches, counters
    /// and the array contents.
    pub fn access(&mut self, array: &str, index: i64, op: Access, cycle: u64) -> Result<Response, MemError> {
        let (k, addr) = self.region(array, index)?;
        let ty = self.regions[k].ty;
        let is_store = matches!(op, Access::Store(_));
        match op {
            Access::Load => {
                self.stats.loads += 1;
                *self.stats.per_array_loads.get_mut(array).expect("declared") += 1;
            }
            Access::Store(_) => {
                self.stats.stores += 1;
                *self.stats.per_array_stores.get_mut(array).expect("declared") += 1;
            }
        }
        let mut latency = self.timing(addr, is_store);
        if self.config.bank_conflicts {
            if cycle != self.bank_cycle {
                self.bank_cycle = cycle;
                self.banks_used.iter_mut().for_each(|b| *b = 0);
            }
            let bank = ((addr / self.config.l1.line_bytes as u64) % self.config.l1.banks as u64) as usize;
            let earlier = self.banks_used[bank];
            if earlier > 0 {
                self.stats.bank_conflicts += 1;
            }
            latency += earlier as u64;
            self.banks_used[bank] += 1;
        }
        if self.config.mshr_limit.is_some() && latency > self.config.l1.hit_latency {
            self.outstanding.push(cycle + latency);
        }
        let slot = &mut self.data.get_mut(array).expect("declared")[index as usize];
        let value = match op {
            Access::Load => Some(*slot),
            Access::Store(v) => {
                *slot = v.cast(ty);
                None
            }
        };
        Ok(Response { value, latency })
    }

    fn timing(&mut self, addr: u64, is_store: bool) -> u64 {
        let l1_line = addr / self.config.l1.line_bytes as u64;
        let l2_line = addr / self.config.l2.line_bytes as u64;
        let mut latency = self.config.l1.hit_latency;
        let write_back = self.config.write_policy == WritePolicy::WriteBackAllocate;
        let allocate = !is_store || write_back;
        match self.l1.access(l1_line, is_store && write_back, allocate) {
            Lookup::Hit => {
                self.stats.l1_hits += 1;
                if is_store && !write_back {
                    self.l2_access(l2_line, true, false);
                }
                return latency;
            }
            Lookup::Miss { evicted_dirty } => {
                self.stats.l1_misses += 1;
                if let Some(victim) = evicted_dirty {
                    self.stats.l1_writebacks += 1;
                    let victim_addr = victim * self.config.l1.line_bytes as u64;
                    self.l2_access(victim_addr / self.config.l2.line_bytes as u64, true, true);
                }
            }
        }
        latency += self.config.l2.hit_latency;
        if !self.l2_access(l2_line, is_store && !write_back, allocate) {
            latency += self.config.dram.latency;
        }
        latency
    }

    /// Returns whether the access hit.
    fn l2_access(&mut self, line: u64, write: bool, allocate: bool) -> bool {
        let write_back = self.config.write_policy == WritePolicy::WriteBackAllocate;
        match self.l2.access(line, write && write_back, allocate) {
            Lookup::Hit => {
                self.stats.l2_hits += 1;
                if write && !write_back {
                    self.stats.dram_accesses += 1;
                }
                true
            }
            Lookup::Miss { evicted_dirty } => {
                self.stats.l2_misses += 1;
                self.stats.dram_accesses += 1;
                if evicted_dirty.is_some() {
                    self.stats.l2_writebacks += 1;
                    self.stats.dram_accesses += 1;
                }
                false
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(config: MemConfig) -> MemSystem {
        let arrays = vec![
            ArrayDecl { name: "a".into(), ty: ValueType::Int, dims: vec![100_000] },
            ArrayDecl { name: "b".into(), ty: ValueType::Float, dims: vec![3] },
        ];
        MemSystem::new(config, &arrays, &ArrayData::new()).unwrap()
    }

    #[test]
    fn default_geometry() {
        let c = MemConfig::default();
        assert_eq!(c.l1.sets(), 128);
        assert_eq!(c.l2.sets(), 393);
    }

    #[test]
    fn cold_miss_then_hit() {
        let mut m = system(MemConfig::default());
        let r = m.access("a", 0, Access::Load, 0).unwrap();
        assert_eq!(r.latency, 4 + 20 + 100);
        let r = m.access("a", 1, Access::Load, 1).unwrap();
        assert_eq!(r.latency, 4);
        let s = m.stats();
        assert_eq!((s.l1_hits, s.l1_misses, s.l2_misses, s.dram_accesses), (1, 1, 1, 1));
    }

    #[test]
    fn conflict_eviction_beyond_associativity() {
        let mut m = system(MemConfig::default());
        // lines 128 * 16 bytes apart share an L1 set
        let stride = (128 * 128 / 8) as i64;
        for k in 0..5 {
            m.access("a", k * stride, Access::Load, k as u64).unwrap();
        }
        let before = m.stats().l1_misses;
        m.access("a", 0, Access::Load, 10).unwrap();
        assert_eq!(m.stats().l1_misses, before + 1);
        // the most recent line is still resident
        let r = m.access("a", 4 * stride, Access::Load, 11).unwrap();
        assert_eq!(r.latency, 4);
    }

    #[test]
    fn stores_write_data_and_count() {
        let mut m = system(MemConfig::default());
        m.access("b", 2, Access::Store(Scalar::Int(7)), 0).unwrap();
        let r = m.access("b", 2, Access::Load, 1).unwrap();
        assert_eq!(r.value, Some(Scalar::Float(7.0)));
        assert_eq!(per_array_load_count(m.stats(), "b").unwrap(), 1);
        assert_eq!(per_array_load_count(m.stats(), "a").unwrap(), 0);
        assert!(per_array_load_count(m.stats(), "zz").is_err());
    }

    #[test]
    fn out_of_range() {
        let mut m = system(MemConfig::default());
        assert!(matches!(m.access("b", 3, Access::Load, 0), Err(MemError::OutOfRange { .. })));
        assert!(matches!(m.access("b", -1, Access::Load, 0), Err(MemError::OutOfRange { .. })));
    }

    #[test]
    fn bank_conflicts_serialize() {
        let mut m = system(MemConfig { bank_conflicts: true, ..MemConfig::default() });
        m.access("a", 0, Access::Load, 0).unwrap();
        let again = m.access("a", 1, Access::Load, 0).unwrap();
        assert_eq!(again.latency, 4 + 1);
        assert_eq!(m.stats().bank_conflicts, 1);
    }

    #[test]
    fn dirty_lines_write_back() {
        let mut m = system(MemConfig::default());
        let stride = (128 * 128 / 8) as i64;
        m.access("a", 0, Access::Store(Scalar::Int(1)), 0).unwrap();
        for k in 1..5 {
            m.access("a", k * stride, Access::Load, k as u64).unwrap();
        }
        assert_eq!(m.stats().l1_writebacks, 1);
        assert_eq!(m.data()["a"][0], Scalar::Int(1));
    }
}
