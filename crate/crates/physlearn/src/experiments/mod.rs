//! Catalog of named experiments, one per reproduced figure or check.

use std::fs;
use std::path::PathBuf;

use physlearn_core::{Error as ModelError, Trajectory};
use serde_json::{Map, Value};

use crate::error::{is_config_error, RunError};
use crate::executor::Parallel;
use crate::output::{CsvWriter, Field, Manifest};
use crate::params::{nearest, overrides_from_json, ParamSpec, Params};
use crate::CODE_VERSION;

mod kernel;
mod learning;
mod neurons;
mod switching;
mod well;

pub(crate) type ModelResult<T> = Result<T, ModelError>;

/// A named, seeded experiment.
#[derive(Debug, Clone, Copy)]
pub struct Experiment {
    pub name: &'static str,
    /// Figure or check the experiment reproduces.
    pub reproduces: &'static str,
    pub description: &'static str,
    pub params: fn() -> Vec<ParamSpec>,
    pub(crate) body: fn(&mut Run<'_>) -> ModelResult<()>,
}

impl Experiment {
    pub fn param_specs(&self) -> Vec<ParamSpec> {
        (self.params)()
    }
}

pub fn catalog() -> &'static [Experiment] {
    &CATALOG
}

/// Looks up an experiment by exact name, suggesting near misses.
pub fn find(name: &str) -> Result<&'static Experiment, RunError> {
    CATALOG.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = CATALOG.iter().map(|e| e.name).collect();
        RunError::UnknownExperiment { name: name.to_string(), suggestions: nearest(name, &names) }
    })
}

static CATALOG: [Experiment; 17] = [
    well::DW_MEAN,
    well::DW_PATHS,
    switching::SWITCH_SIGMOID,
    switching::WAIT_TIME,
    switching::OBSERVED_TRIAL,
    learning::BERNOULLI,
    learning::TRAIN_NOT,
    learning::TRAIN_XOR,
    learning::WEIGHT_DIST,
    neurons::QUARTZ,
    neurons::QUARTZ_NOISY,
    neurons::WALD,
    neurons::FEED_FORWARD,
    neurons::RATE_CODE,
    learning::JARZYNSKI,
    learning::THERMO_LEDGER,
    kernel::QKERNEL,
];

/// Everything that identifies one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: String,
    pub seed: u64,
    /// Flat JSON object applied before `overrides`.
    pub config_file: Option<PathBuf>,
    /// `key=value` pairs, applied in order.
    pub overrides: Vec<String>,
    /// Outputs go to `<out_dir>/<experiment>/`.
    pub out_dir: PathBuf,
    /// Worker threads; `0` uses every core. Never affects the output.
    pub threads: usize,
}

impl RunConfig {
    pub fn new(experiment: impl Into<String>, seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            experiment: experiment.into(),
            seed,
            config_file: None,
            overrides: Vec::new(),
            out_dir: out_dir.into(),
            threads: 0,
        }
    }

    pub fn set(mut self, assignment: impl Into<String>) -> Self {
        self.overrides.push(assignment.into());
        self
    }
}

/// Result of a successful run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub manifest: Manifest,
    /// Declared parameters the experiment did not read.
    pub unread: Vec<&'static str>,
}

/// Working state handed to an experiment body.
pub(crate) struct Run<'a> {
    pub params: &'a Params,
    pub seed: u64,
    pub exec: &'a Parallel,
    tables: Vec<(String, CsvWriter)>,
    summary: Map<String, Value>,
}

impl Run<'_> {
    pub fn table(&mut self, name: &str, table: CsvWriter) {
        self.tables.push((format!("{name}.csv"), table));
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    /// Reads a count parameter that must be at least `min`.
    pub fn count_at_least(&self, key: &'static str, min: usize) -> ModelResult<usize> {
        let n = self.params.count(key);
        if n < min {
            return Err(ModelError::InvalidParameter { name: key, value: n as f64, reason: "count is too small" });
        }
        Ok(n)
    }
}

pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    let experiment = find(&config.experiment)?;
    let mut overrides = Vec::new();
    if let Some(path) = &config.config_file {
        let text =
            fs::read_to_string(path).map_err(|e| RunError::ConfigFile { path: path.clone(), reason: e.to_string() })?;
        overrides.extend(overrides_from_json(path, &text)?);
    }
    for o in &config.overrides {
        overrides.push(crate::params::parse_override(o)?);
    }
    let params = Params::resolve(experiment.name, experiment.param_specs(), &overrides)?;
    let exec = if config.threads == 0 {
        Parallel::global()
    } else {
        Parallel::with_threads(config.threads).map_err(|e| RunError::BadValue {
            key: "threads".into(),
            value: config.threads.to_string(),
            reason: e.to_string(),
        })?
    };

    let dir = config.out_dir.join(experiment.name);
    let mut ctx = Run { params: &params, seed: config.seed, exec: &exec, tables: Vec::new(), summary: Map::new() };
    let outcome = (experiment.body)(&mut ctx);
    fs::create_dir_all(&dir).map_err(|e| RunError::io(&dir, e))?;
    if let Err(e) = outcome {
        if is_config_error(&e) {
            return Err(RunError::Model(e));
        }
        let diagnostics = dir.join("diagnostics.json");
        let body = serde_json::json!({
            "experiment": experiment.name,
            "seed": config.seed,
            "parameters": params.to_json(),
            "error": e.to_string(),
            "detail": format!("{e:?}"),
        });
        fs::write(&diagnostics, format!("{body:#}\n")).map_err(|err| RunError::io(&diagnostics, err))?;
        return Err(RunError::Numerical { source: e, diagnostics });
    }

    let Run { tables, summary, .. } = ctx;
    let mut outputs = Vec::new();
    for (name, table) in &tables {
        table.write_to(&dir.join(name))?;
        outputs.push(name.clone());
    }
    let manifest = Manifest {
        experiment: experiment.name.to_string(),
        reproduces: experiment.reproduces.to_string(),
        code_version: CODE_VERSION.to_string(),
        seed: config.seed,
        parameters: params.to_json(),
        outputs,
        summary,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, manifest.to_json()).map_err(|e| RunError::io(&path, e))?;
    Ok(RunReport { dir, manifest, unread: params.unread() })
}

/// Writes every `every`-th sample of `tr` (and the last one) after the
/// leading `prefix` fields.
pub(crate) fn push_trajectory(table: &mut CsvWriter, prefix: &[Field], tr: &Trajectory, every: usize) {
    let every = every.max(1);
    let n = tr.len();
    for k in (0..n).filter(|k| k % every == 0 || *k + 1 == n) {
        let row = prefix
            .iter()
            .copied()
            .chain(std::iter::once(Field::Float(tr.times()[k])))
            .chain(tr.channels().iter().map(|c| Field::Float(c.values[k])));
        table.row(row);
    }
}

/// Stride that keeps roughly `target` samples out of `n`.
pub(crate) fn stride(n: usize, target: usize) -> usize {
    (n / target.max(1)).max(1)
}
