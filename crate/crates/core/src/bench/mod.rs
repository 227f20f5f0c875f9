//! Benchmark kernels with sequential oracles, verification, sweeps and the
//! communication-distance CDF.

mod cases;
mod synthetic;

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

pub use cases::{baselines, extras, suite, BenchCase};
pub use synthetic::{saturating_graph, throughput_ratio, Throughput};

use crate::frontend::{lower, parse_with, FrontendError};
use crate::graph::{DataflowGraph, NodeKind, ThreadSpace, UnitClass};
use crate::mapper::{map, GridConfig, Mapped, MapperError};
use crate::scalar::Scalar;
use crate::sim::{simulate_mapped, SimError, SimOptions};
use crate::stats::{compare, energy, EnergyModel, SimStats};
use crate::ArrayData;

/// Fraction of communication operations with a distance of at most 16
/// reported for a set of GPGPU kernels; printed next to the suite's own
/// figure for comparison only.
pub const PUBLISHED_FRACTION_AT_16: f64 = 0.87;

/// Issue width of the baseline mode used for speedup columns.
pub const BASELINE_ISSUE_WIDTH: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("frontend: {0}")]
    Frontend(#[from] FrontendError),
    #[error("mapper: {0}")]
    Mapper(#[from] MapperError),
    #[error("sim: {0}")]
    Sim(#[from] SimError),
    #[error("no cases")]
    NoCases,
    #[error("case {case} failed: {detail}")]
    Failed { case: String, detail: String },
}

/// Parses and lowers a case at its size.
pub fn lower_case(case: &BenchCase) -> Result<DataflowGraph, BenchError> {
    let ast = parse_with(case.source(), &case.defines())?;
    let space = ThreadSpace::new(case.extents()).map_err(|e| MapperError::Parameter(e.to_string()))?;
    Ok(lower(&ast, &space)?)
}

/// `base` scaled by the smallest factor that gives every class except
/// control/elevator enough units; communication that still does not fit
/// is spilled by the mapper.
pub fn fitting_grid(base: &GridConfig, g: &DataflowGraph) -> GridConfig {
    let counts = g.class_counts();
    let factor = UnitClass::ALL
        .iter()
        .filter(|&&c| c != UnitClass::ControlElevator)
        .map(|&c| {
            let need = counts.get(&c).copied().unwrap_or(0);
            let have = base.count(c).max(1);
            need.div_ceil(have)
        })
        .max()
        .unwrap_or(1)
        .max(1);
    if factor == 1 {
        base.clone()
    } else {
        base.scaled(factor)
    }
}

/// Lowers and maps a case on a grid derived from `base`.
pub fn prepare(case: &BenchCase, base: &GridConfig) -> Result<(Mapped, GridConfig), BenchError> {
    let g = lower_case(case)?;
    let grid = fitting_grid(base, &g);
    let mapped = map(&g, &grid)?;
    Ok((mapped, grid))
}

/// Ints must match exactly, doubles within 1e-9 relative.
pub fn close(got: Scalar, want: Scalar) -> bool {
    match (got, want) {
        (Scalar::Int(a), Scalar::Int(b)) => a == b,
        _ => {
            let (a, b) = (got.as_float(), want.as_float());
            a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
        }
    }
}

/// First difference between `got` and `want` over the arrays in `want`.
pub fn diff(got: &ArrayData, want: &ArrayData) -> Option<String> {
    for (name, w) in want {
        let Some(g) = got.get(name) else { return Some(format!("array `{name}` missing")) };
        if g.len() != w.len() {
            return Some(format!("array `{name}` has {} elements, expected {}", g.len(), w.len()));
        }
        let bad: Vec<usize> = (0..w.len()).filter(|&i| !close(g[i], w[i])).collect();
        if let Some(&i) = bad.first() {
            return Some(format!("`{name}`[{i}]: got {}, expected {} ({} of {} differ)", g[i], w[i], bad.len(), w.len()));
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub case: String,
    pub seed: u64,
    /// Output mismatch and traffic formula violations; empty on a pass.
    pub failures: Vec<String>,
    pub stats: SimStats,
    pub arrays: ArrayData,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs a case and checks its outputs against the oracle and its load
/// counts against the expected traffic.
pub fn verify(case: &BenchCase, base: &GridConfig, seed: u64, opts: &SimOptions) -> Result<Verdict, BenchError> {
    let (mapped, grid) = prepare(case, base)?;
    verify_mapped(case, &mapped, &grid, seed, opts)
}

pub fn verify_mapped(case: &BenchCase, mapped: &Mapped, grid: &GridConfig, seed: u64, opts: &SimOptions) -> Result<Verdict, BenchError> {
    let inputs = case.inputs(seed);
    let out = simulate_mapped(mapped, grid, &inputs, opts)?;
    let mut failures = Vec::new();
    if let Some(d) = diff(&out.arrays, &case.oracle(&inputs)) {
        failures.push(d);
    }
    for (array, want) in case.traffic() {
        let got = out.stats.memory.per_array_loads.get(&array).copied().unwrap_or(0);
        if got != want {
            failures.push(format!("loads of `{array}`: got {got}, expected {want}"));
        }
    }
    Ok(Verdict { case: case.name(), seed, failures, stats: out.stats, arrays: out.arrays })
}

/// `|shift|` of every communication operation in a lowered graph.
pub fn comm_deltas(g: &DataflowGraph) -> Vec<u64> {
    g.nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Elevator { .. } | NodeKind::ELoadStore { .. } | NodeKind::LiveValue { .. }))
        .filter_map(|n| n.kind.comm()?.shift(&g.space).ok())
        .map(i64::unsigned_abs)
        .collect()
}

/// `(delta, fraction of operations with distance <= delta)` for each
/// distinct delta, ascending.
pub fn delta_cdf(deltas: &[u64]) -> Vec<(u64, f64)> {
    let mut sorted = deltas.to_vec();
    sorted.sort_unstable();
    let total = sorted.len() as f64;
    let mut out: Vec<(u64, f64)> = Vec::new();
    for (i, &d) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / total;
        match out.last_mut() {
            Some(last) if last.0 == d => last.1 = frac,
            _ => out.push((d, frac)),
        }
    }
    out
}

/// Fraction of operations with distance at most `x`.
pub fn cdf_at(cdf: &[(u64, f64)], x: u64) -> f64 {
    cdf.iter().take_while(|(d, _)| *d <= x).last().map_or(0.0, |(_, f)| *f)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridVariant {
    pub name: String,
    pub grid: GridConfig,
}

impl Default for GridVariant {
    fn default() -> Self {
        Self { name: "default".into(), grid: GridConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub case: String,
    pub variant: String,
    pub threads: usize,
    pub cycles: u64,
    pub cycles_baseline: u64,
    /// Baseline-mode cycles over unlimited-issue cycles.
    pub speedup: f64,
    pub loads: u64,
    pub stores: u64,
    pub l1_accesses: u64,
    pub l2_accesses: u64,
    pub dram_accesses: u64,
    pub spills: usize,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub cdf: Vec<(u64, f64)>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "case,variant,threads,cycles,cycles_w32,speedup_vs_w32,loads,stores,l1_accesses,l2_accesses,dram_accesses,spills,energy\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:.6},{},{},{},{},{},{},{:.3}",
                r.case,
                r.variant,
                r.threads,
                r.cycles,
                r.cycles_baseline,
                r.speedup,
                r.loads,
                r.stores,
                r.l1_accesses,
                r.l2_accesses,
                r.dram_accesses,
                r.spills,
                r.energy
            );
        }
        s
    }

    pub fn cdf_csv(&self) -> String {
        let mut s = String::from("delta,cumulative_fraction\n");
        for (d, f) in &self.cdf {
            let _ = writeln!(s, "{d},{f:.6}");
        }
        s
    }

    /// One-line summary of the CDF at a distance of 16.
    pub fn cdf_summary(&self) -> String {
        format!(
            "fraction of communication with delta <= 16: {:.3} (published figure for GPGPU kernels: {:.2})",
            cdf_at(&self.cdf, 16),
            PUBLISHED_FRACTION_AT_16
        )
    }
}

/// Verifies and times every case on every grid variant, in unlimited and
/// baseline issue modes. Cases run in parallel; rows come back in input
/// order.
pub fn sweep(cases: &[BenchCase], variants: &[GridVariant], seed: u64, model: &EnergyModel) -> Result<SweepReport, BenchError> {
    if cases.is_empty() {
        return Err(BenchError::NoCases);
    }
    let default = [GridVariant::default()];
    let variants = if variants.is_empty() { &default[..] } else { variants };
    let jobs: Vec<(&BenchCase, &GridVariant)> = cases.iter().flat_map(|c| variants.iter().map(move |v| (c, v))).collect();
    let rows = jobs
        .par_iter()
        .map(|(case, variant)| sweep_one(case, variant, seed, model))
        .collect::<Result<Vec<_>, _>>()?;
    let mut deltas = Vec::new();
    for c in cases {
        deltas.extend(comm_deltas(&lower_case(c)?));
    }
    Ok(SweepReport { rows, cdf: delta_cdf(&deltas) })
}

fn sweep_one(case: &BenchCase, variant: &GridVariant, seed: u64, model: &EnergyModel) -> Result<SweepRow, BenchError> {
    let (mapped, grid) = prepare(case, &variant.grid)?;
    let fast = verify_mapped(case, &mapped, &grid, seed, &SimOptions::default())?;
    let opts = SimOptions { issue_limit: Some(BASELINE_ISSUE_WIDTH), ..Default::default() };
    let slow = verify_mapped(case, &mapped, &grid, seed, &opts)?;
    for v in [&fast, &slow] {
        if !v.passed() {
            return Err(BenchError::Failed { case: v.case.clone(), detail: v.failures.join("; ") });
        }
    }
    let (a, m) = (&fast.stats, &fast.stats.memory);
    let speedup = compare(a, &slow.stats, model).get("cycles").and_then(|r| r.value()).unwrap_or(f64::NAN);
    Ok(SweepRow {
        case: case.name(),
        variant: variant.name.clone(),
        threads: a.threads,
        cycles: a.cycles,
        cycles_baseline: slow.stats.cycles,
        speedup,
        loads: m.loads,
        stores: m.stores,
        l1_accesses: m.l1_accesses(),
        l2_accesses: m.l2_accesses(),
        dram_accesses: m.dram_accesses,
        spills: a.spills,
        energy: energy(a, model),
    })
}
