use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MapperError;
use crate::graph::UnitClass;
use crate::memsys::MemConfig;

/// Physical inventory of the fabric plus its timing parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub alus: usize,
    pub fpus: usize,
    pub special_units: usize,
    pub ldst_units: usize,
    pub splitjoin_units: usize,
    pub control_elevator_units: usize,
    /// Token buffer capacity of elevators and eLDST units.
    pub token_buffer_capacity: usize,
    pub noc_hop_latency: u64,
    /// Cycles a spilled value spends in the live value cache; defaults to
    /// the L1 hit latency.
    pub lvc_latency: Option<u64>,
    pub alu_latency: u64,
    pub fpu_latency: u64,
    pub special_latency: u64,
    /// Grid columns; rows follow from the unit count.
    pub columns: usize,
    pub memory: MemConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            alus: 32,
            fpus: 32,
            special_units: 12,
            ldst_units: 32,
            splitjoin_units: 16,
            control_elevator_units: 16,
            token_buffer_capacity: 16,
            noc_hop_latency: 1,
            lvc_latency: None,
            alu_latency: 1,
            fpu_latency: 1,
            special_latency: 4,
            columns: 14,
            memory: MemConfig::default(),
        }
    }
}

impl GridConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, MapperError> {
        let g: GridConfig = toml::from_str(text).map_err(|e| MapperError::Config(e.to_string()))?;
        g.check()?;
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self, MapperError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MapperError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("grid config serializes")
    }

    pub fn check(&self) -> Result<(), MapperError> {
        if self.token_buffer_capacity == 0 {
            return Err(MapperError::Parameter("token_buffer_capacity must be at least 1".into()));
        }
        if self.columns == 0 {
            return Err(MapperError::Parameter("columns must be at least 1".into()));
        }
        self.memory.check().map_err(|e| MapperError::Parameter(e.to_string()))
    }

    /// Every unit count multiplied by `factor`.
    pub fn scaled(&self, factor: usize) -> Self {
        Self {
            alus: self.alus * factor,
            fpus: self.fpus * factor,
            special_units: self.special_units * factor,
            ldst_units: self.ldst_units * factor,
            splitjoin_units: self.splitjoin_units * factor,
            control_elevator_units: self.control_elevator_units * factor,
            ..self.clone()
        }
    }

    pub fn count(&self, class: UnitClass) -> usize {
        match class {
            UnitClass::Alu => self.alus,
            UnitClass::Fpu => self.fpus,
            UnitClass::Special => self.special_units,
            UnitClass::Ldst => self.ldst_units,
            UnitClass::SplitJoin => self.splitjoin_units,
            UnitClass::ControlElevator => self.control_elevator_units,
        }
    }

    pub fn count_mut(&mut self, class: UnitClass) -> &mut usize {
        match class {
            UnitClass::Alu => &mut self.alus,
            UnitClass::Fpu => &mut self.fpus,
            UnitClass::Special => &mut self.special_units,
            UnitClass::Ldst => &mut self.ldst_units,
            UnitClass::SplitJoin => &mut self.splitjoin_units,
            UnitClass::ControlElevator => &mut self.control_elevator_units,
        }
    }

    pub fn total_units(&self) -> usize {
        UnitClass::ALL.iter().map(|&c| self.count(c)).sum()
    }

    pub fn rows(&self) -> usize {
        self.total_units().div_ceil(self.columns)
    }

    pub fn lvc_latency(&self) -> u64 {
        self.lvc_latency.unwrap_or(self.memory.l1.hit_latency)
    }

    pub fn latency_of(&self, class: UnitClass) -> u64 {
        match class {
            UnitClass::Alu => self.alu_latency,
            UnitClass::Fpu => self.fpu_latency,
            UnitClass::Special => self.special_latency,
            _ => 1,
        }
    }

    /// Physical units in row-major order. Classes are interleaved so that
    /// every region of the grid holds a proportional mix.
    pub fn layout(&self) -> Vec<Unit> {
        let total = self.total_units();
        let mut placed = [0usize; 6];
        let mut units = Vec::with_capacity(total);
        for i in 0..total {
            let mut best: Option<(usize, f64)> = None;
            for (k, &class) in UnitClass::ALL.iter().enumerate() {
                let n = self.count(class);
                if placed[k] == n {
                    continue;
                }
                let deficit = n as f64 * (i + 1) as f64 / total as f64 - placed[k] as f64;
                if best.is_none_or(|(_, d)| deficit > d + 1e-12) {
                    best = Some((k, deficit));
                }
            }
            let (k, _) = best.expect("units remain");
            placed[k] += 1;
            units.push(Unit { index: i, class: UnitClass::ALL[k], x: i % self.columns, y: i / self.columns });
        }
        units
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Unit {
    pub index: usize,
    pub class: UnitClass,
    pub x: usize,
    pub y: usize,
}
