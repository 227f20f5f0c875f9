//! Run statistics, the event-weighted energy proxy and run comparison.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::memsys::MemStats;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UnitFirings {
    pub node: usize,
    pub unit: usize,
    pub class: String,
    pub firings: u64,
    pub utilization: f64,
}

/// Per-elevator, per-window-group token accounting.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRow {
    pub node: usize,
    pub group: usize,
    pub received: u64,
    pub emitted: u64,
    pub constants: u64,
    pub drops: u64,
}

impl AuditRow {
    /// `received - (emitted - constants + drops)`; zero when balanced.
    pub fn imbalance(&self) -> i64 {
        self.received as i64 - (self.emitted as i64 - self.constants as i64 + self.drops as i64)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub cycles: u64,
    pub threads: usize,
    pub injected_threads: usize,
    pub total_firings: u64,
    /// Keyed by unit class name.
    pub firings_by_class: BTreeMap<String, u64>,
    pub retags: u64,
    pub constant_injections: u64,
    pub boundary_drops: u64,
    pub redundant_drops: u64,
    pub spills: usize,
    pub lvc_accesses: u64,
    pub noc_hops: u64,
    pub max_buffer_occupancy: usize,
    /// Number of threads served by each value an eLDST loaded, as
    /// `consumers -> loads`.
    pub reuse_histogram: BTreeMap<String, u64>,
    pub memory: MemStats,
    pub units: Vec<UnitFirings>,
    pub audit: Vec<AuditRow>,
}

impl SimStats {
    pub fn firings(&self, class: crate::graph::UnitClass) -> u64 {
        self.firings_by_class.get(class.name()).copied().unwrap_or(0)
    }

    pub fn audit_balanced(&self) -> bool {
        self.audit.iter().all(|r| r.imbalance() == 0)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("stats serialize")
    }

    /// Scalar counters as `key,value` rows.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("cycles".into(), self.cycles.to_string()),
            ("threads".into(), self.threads.to_string()),
            ("injected_threads".into(), self.injected_threads.to_string()),
            ("total_firings".into(), self.total_firings.to_string()),
            ("retags".into(), self.retags.to_string()),
            ("constant_injections".into(), self.constant_injections.to_string()),
            ("boundary_drops".into(), self.boundary_drops.to_string()),
            ("redundant_drops".into(), self.redundant_drops.to_string()),
            ("spills".into(), self.spills.to_string()),
            ("lvc_accesses".into(), self.lvc_accesses.to_string()),
            ("noc_hops".into(), self.noc_hops.to_string()),
            ("max_buffer_occupancy".into(), self.max_buffer_occupancy.to_string()),
        ];
        for (k, v) in &self.firings_by_class {
            rows.push((format!("firings.{k}"), v.to_string()));
        }
        let m = &self.memory;
        for (k, v) in [
            ("loads", m.loads),
            ("stores", m.stores),
            ("l1_hits", m.l1_hits),
            ("l1_misses", m.l1_misses),
            ("l2_hits", m.l2_hits),
            ("l2_misses", m.l2_misses),
            ("dram_accesses", m.dram_accesses),
            ("l1_writebacks", m.l1_writebacks),
            ("l2_writebacks", m.l2_writebacks),
            ("bank_conflicts", m.bank_conflicts),
        ] {
            rows.push((format!("memory.{k}"), v.to_string()));
        }
        for (k, v) in &m.per_array_loads {
            rows.push((format!("loads.{k}"), v.to_string()));
        }
        for (k, v) in &m.per_array_stores {
            rows.push((format!("stores.{k}"), v.to_string()));
        }
        let mut s = String::from("key,value\n");
        for (k, v) in rows {
            s.push_str(&k);
            s.push(',');
            s.push_str(&v);
            s.push('\n');
        }
        s
    }
}

/// Energy per event class, in arbitrary units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyModel {
    pub alu_op: f64,
    pub fpu_op: f64,
    pub elevator_retag: f64,
    pub l1_access: f64,
    pub l2_access: f64,
    pub dram_access: f64,
    pub noc_hop: f64,
    pub lvc_access: f64,
}

impl Default for EnergyModel {
    /// Relative weights in the usual order of magnitude for on-chip
    /// arithmetic, SRAM and off-chip DRAM events.
    fn default() -> Self {
        Self {
            alu_op: 1.0,
            fpu_op: 2.0,
            elevator_retag: 0.5,
            l1_access: 5.0,
            l2_access: 20.0,
            dram_access: 200.0,
            noc_hop: 0.2,
            lvc_access: 5.0,
        }
    }
}

impl EnergyModel {
    pub fn zero() -> Self {
        Self {
            alu_op: 0.0,
            fpu_op: 0.0,
            elevator_retag: 0.0,
            l1_access: 0.0,
            l2_access: 0.0,
            dram_access: 0.0,
            noc_hop: 0.0,
            lvc_access: 0.0,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        let w = [
            self.alu_op,
            self.fpu_op,
            self.elevator_retag,
            self.l1_access,
            self.l2_access,
            self.dram_access,
            self.noc_hop,
            self.lvc_access,
        ];
        if w.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err("energy weights must be finite and non-negative".into())
        }
    }
}

pub fn energy(stats: &SimStats, model: &EnergyModel) -> f64 {
    use crate::graph::UnitClass;
    let m = &stats.memory;
    model.alu_op * stats.firings(UnitClass::Alu) as f64
        + model.fpu_op * stats.firings(UnitClass::Fpu) as f64
        + model.elevator_retag * stats.retags as f64
        + model.l1_access * m.l1_accesses() as f64
        + model.l2_access * m.l2_accesses() as f64
        + model.dram_access * m.dram_accesses as f64
        + model.noc_hop * stats.noc_hops as f64
        + model.lvc_access * stats.lvc_accesses as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Defined(f64),
    Undefined,
}

impl Ratio {
    pub fn of(b: f64, a: f64) -> Self {
        if a == 0.0 {
            Ratio::Undefined
        } else {
            Ratio::Defined(b / a)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Defined(v) => Some(v),
            Ratio::Undefined => None,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Defined(v) => write!(f, "{v:.6}"),
            Ratio::Undefined => f.write_str("undefined"),
        }
    }
}

/// Ratios `B / A` for each metric, in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub metrics: Vec<(String, Ratio)>,
}

impl CompareReport {
    pub fn get(&self, name: &str) -> Option<Ratio> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, r)| *r)
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, r) in &self.metrics {
            writeln!(f, "{k},{r}")?;
        }
        Ok(())
    }
}

pub fn compare(a: &SimStats, b: &SimStats, model: &EnergyModel) -> CompareReport {
    let (ma, mb) = (&a.memory, &b.memory);
    let mut metrics = vec![
        ("cycles".to_string(), Ratio::of(b.cycles as f64, a.cycles as f64)),
        ("loads".to_string(), Ratio::of(mb.loads as f64, ma.loads as f64)),
        ("stores".to_string(), Ratio::of(mb.stores as f64, ma.stores as f64)),
        ("l1_accesses".to_string(), Ratio::of(mb.l1_accesses() as f64, ma.l1_accesses() as f64)),
        ("l2_accesses".to_string(), Ratio::of(mb.l2_accesses() as f64, ma.l2_accesses() as f64)),
        ("dram_accesses".to_string(), Ratio::of(mb.dram_accesses as f64, ma.dram_accesses as f64)),
    ];
    for (name, &la) in &ma.per_array_loads {
        if let Some(&lb) = mb.per_array_loads.get(name) {
            metrics.push((format!("loads.{name}"), Ratio::of(lb as f64, la as f64)));
        }
    }
    metrics.push(("energy".to_string(), Ratio::of(energy(b, model), energy(a, model))));
    CompareReport { metrics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::UnitClass;

    fn sample() -> SimStats {
        let mut s = SimStats { cycles: 100, retags: 7, noc_hops: 11, lvc_accesses: 2, ..Default::default() };
        s.firings_by_class.insert(UnitClass::Alu.name().into(), 40);
        s.firings_by_class.insert(UnitClass::Fpu.name().into(), 3);
        s.memory.l1_hits = 5;
        s.memory.l1_misses = 2;
        s.memory.l2_misses = 2;
        s.memory.dram_accesses = 2;
        s.memory.loads = 7;
        s
    }

    #[test]
    fn energy_weights() {
        let s = sample();
        assert_eq!(energy(&s, &EnergyModel::zero()), 0.0);
        let dram_only = EnergyModel { dram_access: 1.0, ..EnergyModel::zero() };
        assert_eq!(energy(&s, &dram_only), 2.0);
        let all = EnergyModel::default();
        let expected = 40.0 + 6.0 + 3.5 + 35.0 + 40.0 + 400.0 + 2.2 + 10.0;
        assert!((energy(&s, &all) - expected).abs() < 1e-9);
    }

    #[test]
    fn compare_identical_and_zero() {
        let s = sample();
        let r = compare(&s, &s, &EnergyModel::default());
        for (k, v) in &r.metrics {
            if k == "stores" {
                assert_eq!(*v, Ratio::Undefined);
                assert_eq!(v.to_string(), "undefined");
            } else {
                assert_eq!(*v, Ratio::Defined(1.0), "{k}");
            }
        }
    }

    #[test]
    fn serializes() {
        let mut s = sample();
        s.audit.push(AuditRow { node: 1, group: 0, received: 3, emitted: 4, constants: 1, drops: 0 });
        assert!(s.audit_balanced());
        let text = s.to_toml();
        let back: SimStats = toml::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(s.to_csv().contains("\ncycles,100\n"));
    }
}
