//! `dmtsim`: compile, map, simulate and verify kernels.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 pipeline error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dmt_cgra::bench::{self, BenchCase, BenchError, GridVariant};
use dmt_cgra::graph;
use dmt_cgra::mapper::map;
use dmt_cgra::pipeline::{self, RunManifest};
use dmt_cgra::sim::SimOptions;
use dmt_cgra::stats::EnergyModel;

#[derive(Parser)]
#[command(name = "dmtsim", version, about = "Dataflow CGRA compiler and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a kernel from a TOML manifest and write its artifacts.
    Run {
        manifest: PathBuf,
        /// Overrides the manifest's grid config.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Comma-separated thread-space extents, e.g. `8,8`.
        #[arg(long, value_delimiter = ',')]
        extents: Option<Vec<usize>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        issue_limit: Option<usize>,
        #[arg(long)]
        trace: bool,
        /// Output directory; defaults to the manifest's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check bundled benchmarks against their oracles and traffic formulas.
    Verify {
        /// Case names (see `list`); defaults to the suite.
        cases: Vec<String>,
        /// Every bundled case, baselines and extras included.
        #[arg(long)]
        all: bool,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        issue_limit: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify and time cases on grid variants; writes `sweep.csv` and `delta_cdf.csv`.
    Sweep {
        cases: Vec<String>,
        /// Grid variant files; each is named after its file stem.
        #[arg(long)]
        grid: Vec<PathBuf>,
        /// Energy model weights (TOML).
        #[arg(long)]
        energy: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the lowered graph of a kernel.
    DumpGraph {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Graphviz output instead of text.
        #[arg(long)]
        dot: bool,
        /// Dump the graph after communication expansion.
        #[arg(long)]
        expanded: bool,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the placement and routes of a kernel.
    DumpMapping {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the bundled benchmark cases.
    List,
}

#[derive(Args)]
struct KernelArgs {
    kernel: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    extents: Vec<usize>,
    /// `NAME=VALUE` const override; repeatable.
    #[arg(short = 'D', long = "define", value_parser = parse_define)]
    defines: Vec<(String, i64)>,
}

fn parse_define(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v = v.trim().parse::<i64>().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// A failed command: `Verify` maps to exit 1, everything else to exit 2.
enum Failure {
    Verify(String),
    Pipeline(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verify(_) => 1,
            Failure::Pipeline(_) => 2,
        }
    }
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Pipeline(e.to_string())
    }
}

fn bench_failure(e: BenchError) -> Failure {
    match e {
        BenchError::Failed { .. } => Failure::Verify(e.to_string()),
        _ => Failure::Pipeline(e.to_string()),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| format!("output: {}: {e}", dir.display()))?;
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| format!("output: {}: {e}", p.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<(), Failure> {
    match out {
        Some(dir) => write(dir, name, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn all_cases() -> Vec<BenchCase> {
    bench::suite().into_iter().chain(bench::baselines()).chain(bench::extras()).collect()
}

fn resolve_cases(names: &[String], all: bool) -> Result<Vec<BenchCase>, Failure> {
    if all {
        return Ok(all_cases());
    }
    if names.is_empty() {
        return Ok(bench::suite());
    }
    names
        .iter()
        .map(|n| BenchCase::from_name(n).ok_or_else(|| Failure::Pipeline(format!("unknown case `{n}` (try `dmtsim list`)"))))
        .collect()
}

fn run(
    manifest: &Path,
    grid: Option<PathBuf>,
    extents: Option<Vec<usize>>,
    seed: Option<u64>,
    issue_limit: Option<usize>,
    trace: bool,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut m = RunManifest::load(manifest)?;
    if grid.is_some() {
        m.grid = grid;
    }
    if let Some(e) = extents {
        m.extents = e;
    }
    if let Some(s) = seed {
        m.seed = s;
    }
    if issue_limit.is_some() {
        m.issue_limit = issue_limit;
    }
    m.trace |= trace;
    if let Some(o) = out {
        m.output = o;
    }
    let result = pipeline::run(&m)?;
    let files = pipeline::write_artifacts(&result, &m.output)?;
    let mismatch = pipeline::check_expected(&m, &result)?;
    let s = &result.sim.stats;
    println!(
        "{}: {} threads, {} cycles, {} loads, {} stores, {} spills; {} files in {}",
        m.kernel.display(),
        s.threads,
        s.cycles,
        s.memory.loads,
        s.memory.stores,
        s.spills,
        files.len(),
        m.output.display()
    );
    match mismatch {
        Some(d) => Err(Failure::Verify(format!("output differs from expected: {d}"))),
        None => Ok(()),
    }
}

fn verify(cases: &[BenchCase], seeds: &[u64], grid: Option<&Path>, issue_limit: Option<usize>, out: Option<&Path>) -> Result<(), Failure> {
    let base = pipeline::load_grid(grid)?;
    let mut report = String::new();
    let mut failed = 0;
    for case in cases {
        for &seed in seeds {
            let opts = SimOptions { seed: Some(seed), issue_limit, ..Default::default() };
            let v = bench::verify(case, &base, seed, &opts)?;
            let line = if v.passed() {
                format!("PASS {} seed={seed} cycles={} loads={}", v.case, v.stats.cycles, v.stats.memory.loads)
            } else {
                failed += 1;
                format!("FAIL {} seed={seed}: {}", v.case, v.failures.join("; "))
            };
            println!("{line}");
            report.push_str(&line);
            report.push('\n');
        }
    }
    if let Some(dir) = out {
        write(dir, "verify.txt", &report)?;
    }
    if failed > 0 {
        return Err(Failure::Verify(format!("{failed} of {} runs failed", cases.len() * seeds.len())));
    }
    Ok(())
}

fn sweep(cases: &[BenchCase], grids: &[PathBuf], energy: Option<&Path>, seed: u64, out: &Path) -> Result<(), Failure> {
    let variants = grids
        .iter()
        .map(|p| {
            let name = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok(GridVariant { name, grid: pipeline::load_grid(Some(p))? })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let model = match energy {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("energy: {}: {e}", p.display()))?;
            let m: EnergyModel = toml::from_str(&text).map_err(|e| format!("energy: {e}"))?;
            m.check().map_err(|e| format!("energy: {e}"))?;
            m
        }
        None => EnergyModel::default(),
    };
    let report = bench::sweep(cases, &variants, seed, &model).map_err(bench_failure)?;
    write(out, "sweep.csv", &report.to_csv())?;
    write(out, "delta_cdf.csv", &report.cdf_csv())?;
    print!("{}", report.to_csv());
    println!("{}", report.cdf_summary());
    Ok(())
}

fn lowered(k: &KernelArgs) -> Result<graph::DataflowGraph, Failure> {
    let defines: BTreeMap<String, i64> = k.defines.iter().cloned().collect();
    Ok(pipeline::compile(&k.kernel, &defines, &k.extents)?)
}

fn dump_graph(k: &KernelArgs, dot: bool, expanded: bool, grid: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let mut g = lowered(k)?;
    if expanded {
        let grid = pipeline::load_grid(grid)?;
        g = map(&g, &grid).map_err(|e| format!("mapper: {e}"))?.graph;
    }
    if dot {
        emit(out, "graph.dot", &graph::to_dot(&g))
    } else {
        emit(out, "graph.txt", &graph::to_text(&g))
    }
}

fn dump_mapping(k: &KernelArgs, grid: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let g = lowered(k)?;
    let grid = pipeline::load_grid(grid)?;
    let m = map(&g, &grid).map_err(|e| format!("mapper: {e}"))?;
    emit(out, "mapping.txt", &m.mapping.to_text(&m.graph))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { manifest, grid, extents, seed, issue_limit, trace, out } => {
            run(&manifest, grid, extents, seed, issue_limit, trace, out)
        }
        Command::Verify { cases, all, seeds, grid, issue_limit, out } => resolve_cases(&cases, all)
            .and_then(|c| verify(&c, &seeds, grid.as_deref(), issue_limit, out.as_deref())),
        Command::Sweep { cases, grid, energy, seed, out } => {
            resolve_cases(&cases, false).and_then(|c| sweep(&c, &grid, energy.as_deref(), seed, &out))
        }
        Command::DumpGraph { kernel, dot, expanded, grid, out } => {
            dump_graph(&kernel, dot, expanded, grid.as_deref(), out.as_deref())
        }
        Command::DumpMapping { kernel, grid, out } => dump_mapping(&kernel, grid.as_deref(), out.as_deref()),
        Command::List => {
            for c in all_cases() {
                println!("{}", c.name());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Verify(msg) | Failure::Pipeline(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
