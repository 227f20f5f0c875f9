//! End-to-end runs driven by a TOML manifest: parse, lower, map, simulate
//! and write the artifacts.
//!
//! ```toml
//! kernel = "../kernels/prefix_sum.dsl"
//! extents = [64]
//! seed = 1
//! output = "out/prefix_sum"
//! trace = false
//! # grid = "../grids/default.toml"
//! # issue_limit = 32
//!
//! [defines]
//! N = 64
//!
//! [inputs]
//! # in = "data/in.txt"
//!
//! [expect]
//! # out = "data/out.txt"
//! ```
//!
//! Relative paths resolve against the manifest's directory. Arrays the
//! kernel reads and that have no `[inputs]` entry are filled from `seed`.
//! Arrays listed under `[expect]` are compared with [`check_expected`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::frontend::{lower, parse_with};
use crate::graph::{DataflowGraph, NodeKind, ThreadSpace};
use crate::mapper::{map, GridConfig, Mapped};
use crate::scalar::{Scalar, ValueType};
use crate::sim::{simulate_mapped, SimOptions, SimOutput};
use crate::ArrayData;

/// Every error carries the stage it came from as a prefix.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("frontend: {0}")]
    Frontend(String),
    #[error("mapper: {0}")]
    Mapper(String),
    #[error("sim: {0}")]
    Sim(String),
    #[error("output: {0}")]
    Output(String),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub kernel: PathBuf,
    #[serde(default)]
    pub grid: Option<PathBuf>,
    pub extents: Vec<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub issue_limit: Option<usize>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub trace: bool,
    /// `const` overrides for the kernel.
    #[serde(default)]
    pub defines: BTreeMap<String, i64>,
    /// Array name to a text file of whitespace-separated values.
    #[serde(default)]
    pub inputs: BTreeMap<String, PathBuf>,
    /// Array name to a file of expected final values.
    #[serde(default)]
    pub expect: BTreeMap<String, PathBuf>,
}

fn default_seed() -> u64 {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl RunManifest {
    /// A manifest for `kernel` with every optional field at its default.
    pub fn new(kernel: impl Into<PathBuf>, extents: Vec<usize>) -> Self {
        Self {
            kernel: kernel.into(),
            grid: None,
            extents,
            seed: default_seed(),
            issue_limit: None,
            output: default_output(),
            trace: false,
            defines: BTreeMap::new(),
            inputs: BTreeMap::new(),
            expect: BTreeMap::new(),
        }
    }

    /// Parses a manifest; relative paths are joined onto `base`.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut m: RunManifest = toml::from_str(text).map_err(|e| PipelineError::Manifest(e.to_string()))?;
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut m.kernel);
        join(&mut m.output);
        if let Some(g) = m.grid.as_mut() {
            join(g);
        }
        for p in m.inputs.values_mut().chain(m.expect.values_mut()) {
            join(p);
        }
        m.check()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Manifest(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        if self.extents.is_empty() || self.extents.contains(&0) {
            return Err(PipelineError::Manifest(format!("extents must be positive, got {:?}", self.extents)));
        }
        if self.issue_limit == Some(0) {
            return Err(PipelineError::Manifest("issue_limit must be at least 1".into()));
        }
        Ok(())
    }
}

/// Reads, parses and lowers a kernel file.
pub fn compile(kernel: &Path, defines: &BTreeMap<String, i64>, extents: &[usize]) -> Result<DataflowGraph, PipelineError> {
    let src = fs::read_to_string(kernel).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            PipelineError::Frontend(format!("file not found: {}", kernel.display()))
        } else {
            PipelineError::Frontend(format!("cannot read {}: {e}", kernel.display()))
        }
    })?;
    let ast = parse_with(&src, defines).map_err(|e| PipelineError::Frontend(e.to_string()))?;
    let space = ThreadSpace::new(extents.to_vec()).map_err(|e| PipelineError::Frontend(e.to_string()))?;
    lower(&ast, &space).map_err(|e| PipelineError::Frontend(e.to_string()))
}

/// The grid at `path`, or the default grid.
pub fn load_grid(path: Option<&Path>) -> Result<GridConfig, PipelineError> {
    match path {
        Some(p) => GridConfig::load(p).map_err(|e| PipelineError::Mapper(e.to_string())),
        None => Ok(GridConfig::default()),
    }
}

/// Names of the arrays the graph loads from, in declaration order.
pub fn read_arrays(g: &DataflowGraph) -> Vec<String> {
    g.arrays
        .iter()
        .filter(|a| {
            g.nodes.iter().any(|n| {
                matches!(n.kind, NodeKind::Load { .. } | NodeKind::ELoadStore { .. })
                    && n.kind.memory_array() == Some(a.name.as_str())
            })
        })
        .map(|a| a.name.clone())
        .collect()
}

/// Seeded inputs for every array the graph reads: ints in [-100, 100],
/// floats in [-1, 1).
pub fn random_inputs(g: &DataflowGraph, seed: u64) -> ArrayData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ArrayData::new();
    for name in read_arrays(g) {
        let decl = g.array(&name).expect("declared");
        let values = (0..decl.len())
            .map(|_| match decl.ty {
                ValueType::Int => Scalar::Int(rng.random_range(-100..=100)),
                ValueType::Float => Scalar::Float(rng.random_range(-1.0..1.0)),
            })
            .collect();
        out.insert(name, values);
    }
    out
}

/// Parses whitespace-separated values of type `ty`.
pub fn parse_values(text: &str, ty: ValueType) -> Result<Vec<Scalar>, String> {
    text.split_whitespace()
        .enumerate()
        .map(|(i, w)| Scalar::parse(w, ty).ok_or_else(|| format!("value {i} `{w}` is not a valid {ty}")))
        .collect()
}

/// One value per line.
pub fn format_values(values: &[Scalar]) -> String {
    let mut s = String::new();
    for v in values {
        let _ = writeln!(s, "{v}");
    }
    s
}

/// Reads a file of values for each listed array.
fn read_files(files: &BTreeMap<String, PathBuf>, g: &DataflowGraph) -> Result<ArrayData, PipelineError> {
    let mut out = ArrayData::new();
    for (name, path) in files {
        let decl = g.array(name).ok_or_else(|| PipelineError::Manifest(format!("file for undeclared array `{name}`")))?;
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Manifest(format!("cannot read {}: {e}", path.display())))?;
        let values = parse_values(&text, decl.ty).map_err(|e| PipelineError::Manifest(format!("{}: {e}", path.display())))?;
        if values.len() != decl.len() {
            return Err(PipelineError::Manifest(format!(
                "{}: {} values for `{name}`, expected {}",
                path.display(),
                values.len(),
                decl.len()
            )));
        }
        out.insert(name.clone(), values);
    }
    Ok(out)
}

fn gather_inputs(m: &RunManifest, g: &DataflowGraph) -> Result<ArrayData, PipelineError> {
    let mut inputs = random_inputs(g, m.seed);
    inputs.extend(read_files(&m.inputs, g)?);
    Ok(inputs)
}

/// Compares the run's final arrays with the manifest's `[expect]` files:
/// ints exactly, floats within 1e-9 relative. `Ok(None)` means they match.
pub fn check_expected(m: &RunManifest, out: &RunOutput) -> Result<Option<String>, PipelineError> {
    let want = read_files(&m.expect, &out.mapped.graph)?;
    Ok(crate::bench::diff(&out.sim.arrays, &want))
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub mapped: Mapped,
    pub grid: GridConfig,
    pub inputs: ArrayData,
    pub sim: SimOutput,
}

/// Runs every stage up to and including simulation.
pub fn run(m: &RunManifest) -> Result<RunOutput, PipelineError> {
    m.check()?;
    let g = compile(&m.kernel, &m.defines, &m.extents)?;
    let grid = load_grid(m.grid.as_deref())?;
    let mapped = map(&g, &grid).map_err(|e| PipelineError::Mapper(e.to_string()))?;
    let inputs = gather_inputs(m, &g)?;
    let opts = SimOptions { seed: Some(m.seed), issue_limit: m.issue_limit, trace: m.trace, ..Default::default() };
    let sim = simulate_mapped(&mapped, &grid, &inputs, &opts).map_err(|e| PipelineError::Sim(e.to_string()))?;
    Ok(RunOutput { mapped, grid, inputs, sim })
}

/// Writes `inputs/<name>.txt`, `arrays/<name>.txt` (final memory),
/// `stats.toml`, `stats.csv` and, when traced, `trace.txt` under `dir`.
/// Returns the files written, relative to `dir`.
pub fn write_artifacts(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let io = |p: &Path, e: std::io::Error| PipelineError::Output(format!("{}: {e}", p.display()));
    for sub in ["inputs", "arrays"] {
        let d = dir.join(sub);
        fs::create_dir_all(&d).map_err(|e| io(&d, e))?;
    }
    let listed = |sub: &str, data: &ArrayData| -> Vec<(PathBuf, String)> {
        data.iter().map(|(name, values)| (PathBuf::from(sub).join(format!("{name}.txt")), format_values(values))).collect()
    };
    let mut files = listed("inputs", &out.inputs);
    files.extend(listed("arrays", &out.sim.arrays));
    files.push(("stats.toml".into(), out.sim.stats.to_toml()));
    files.push(("stats.csv".into(), out.sim.stats.to_csv()));
    if !out.sim.trace.is_empty() {
        let mut t = out.sim.trace.join("\n");
        t.push('\n');
        files.push(("trace.txt".into(), t));
    }
    for (rel, text) in &files {
        let p = dir.join(rel);
        fs::write(&p, text).map_err(|e| io(&p, e))?;
    }
    Ok(files.into_iter().map(|f| f.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_paths_resolve_against_base() {
        let text = "kernel = \"k.dsl\"\nextents = [4]\ngrid = \"/abs/g.toml\"\n[inputs]\nin = \"d/in.txt\"\n";
        let m = RunManifest::from_toml_str(text, Path::new("/base")).unwrap();
        assert_eq!(m.kernel, PathBuf::from("/base/k.dsl"));
        assert_eq!(m.grid, Some(PathBuf::from("/abs/g.toml")));
        assert_eq!(m.inputs["in"], PathBuf::from("/base/d/in.txt"));
        assert_eq!(m.output, PathBuf::from("/base/out"));
        assert_eq!(m.seed, 1);
    }

    #[test]
    fn manifest_rejects_bad_fields() {
        let e = RunManifest::from_toml_str("kernel = \"k\"\nextents = [0]\n", Path::new(".")).unwrap_err();
        assert!(e.to_string().starts_with("manifest: extents must be positive"), "{e}");
        let e = RunManifest::from_toml_str("kernel = \"k\"\nextents = [2]\ncolour = 1\n", Path::new(".")).unwrap_err();
        assert!(e.to_string().contains("unknown field"), "{e}");
    }

    #[test]
    fn values_round_trip() {
        let v = vec![Scalar::Float(0.1), Scalar::Float(-2.0)];
        assert_eq!(parse_values(&format_values(&v), ValueType::Float).unwrap(), v);
        assert_eq!(parse_values("1 2\n3", ValueType::Int).unwrap(), vec![Scalar::Int(1), Scalar::Int(2), Scalar::Int(3)]);
        assert!(parse_values("1 x", ValueType::Int).unwrap_err().contains("`x`"));
    }

    #[test]
    fn missing_kernel_is_a_frontend_error() {
        let e = compile(Path::new("/nonexistent/k.dsl"), &BTreeMap::new(), &[4]).unwrap_err();
        assert_eq!(e.to_string(), "frontend: file not found: /nonexistent/k.dsl");
    }
}
