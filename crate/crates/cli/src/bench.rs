//! Config-driven benchmark sweeps over instances, algorithms, and seeds.
//!
//! Rows are computed in parallel but collected and sorted deterministically,
//! so the CSV output is byte-identical for any worker count (unless the
//! wall-clock column is requested).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use submax::{brute_force_opt, verification_corpus, InstanceSpec, WeightMode};

use crate::exec::{self, Algorithm, ExecOpts};
use crate::instance;

fn default_mode() -> WeightMode {
    WeightMode::Exact
}

fn default_delta() -> f64 {
    1e-3
}

fn default_switch_time() -> f64 {
    0.372
}

fn default_p() -> f64 {
    0.23
}

fn default_z_rounds() -> usize {
    1
}

/// A benchmark sweep: the cross product of instances, algorithms, and
/// seeds, run under one set of algorithm options.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Instance files to load.
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    /// Also include the built-in verification corpus.
    #[serde(default)]
    pub corpus: bool,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_mode")]
    pub mode: WeightMode,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_switch_time")]
    pub switch_time: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub best_of_two: bool,
    #[serde(default = "default_z_rounds")]
    pub z_rounds: usize,
    #[serde(default)]
    pub theory_schedule: bool,
}

pub fn load_config(path: &Path) -> Result<BenchConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading benchmark config {}", path.display()))?;
    let config: BenchConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing benchmark config {}", path.display()))?;
    if config.algorithms.is_empty() {
        bail!("benchmark config lists no algorithms");
    }
    if config.seeds.is_empty() {
        bail!("benchmark config lists no seeds");
    }
    if config.instances.is_empty() && !config.corpus {
        bail!("benchmark config lists no instances and does not enable the corpus");
    }
    Ok(config)
}

/// One benchmark result. Failed runs carry their error in `status` so a bad
/// cell does not abort the sweep.
#[derive(Serialize)]
pub struct Row {
    pub instance: String,
    pub algorithm: &'static str,
    pub seed: u64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_calls: Option<u64>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

struct Outcome {
    value: f64,
    f_opt: Option<f64>,
    ratio: Option<f64>,
    oracle_calls: u64,
    wall_ms: Option<f64>,
}

fn row_outcome(
    spec: &InstanceSpec,
    algorithm: Algorithm,
    seed: u64,
    config: &BenchConfig,
    timing: bool,
) -> Result<Outcome> {
    // A fresh instantiation per row keeps the oracle counter private to it.
    let (f, p) = spec.instantiate()?;
    let opts = ExecOpts {
        mode: config.mode,
        seed,
        switch_time: config.switch_time,
        p: config.p,
        delta: config.delta,
        theory_schedule: config.theory_schedule,
        best_of_two: config.best_of_two,
        z_rounds: config.z_rounds,
        record: false,
    };
    let started = Instant::now();
    let execution = exec::execute(&f, &p, algorithm, &opts)?;
    let wall_ms = timing.then(|| started.elapsed().as_secs_f64() * 1e3);
    let (f_opt, ratio) = if spec.n <= 20 {
        let (_, f_opt) = brute_force_opt(&f, &p)?;
        (Some(f_opt), (f_opt > 0.0).then(|| execution.value / f_opt))
    } else {
        (None, None)
    };
    Ok(Outcome { value: execution.value, f_opt, ratio, oracle_calls: execution.oracle_calls, wall_ms })
}

fn run_row(
    spec: &InstanceSpec,
    algorithm: Algorithm,
    seed: u64,
    config: &BenchConfig,
    timing: bool,
) -> Row {
    let mut row = Row {
        instance: spec.label(),
        algorithm: algorithm.name(),
        seed,
        n: spec.n,
        value: None,
        f_opt: None,
        ratio: None,
        oracle_calls: None,
        status: String::new(),
        wall_ms: None,
    };
    match row_outcome(spec, algorithm, seed, config, timing) {
        Ok(outcome) => {
            row.value = Some(outcome.value);
            row.f_opt = outcome.f_opt;
            row.ratio = outcome.ratio;
            row.oracle_calls = Some(outcome.oracle_calls);
            row.status = "ok".to_string();
            row.wall_ms = outcome.wall_ms;
        }
        Err(err) => row.status = format!("error: {err:#}"),
    }
    row
}

/// Runs the sweep on `workers` threads (0 means one per core) and returns
/// the rows sorted by instance, algorithm, and seed.
pub fn run_benchmark(config: &BenchConfig, workers: usize, timing: bool) -> Result<Vec<Row>> {
    let mut specs = Vec::new();
    for path in &config.instances {
        specs.push(instance::load(path)?);
    }
    if config.corpus {
        specs.extend(verification_corpus());
    }
    let mut tasks = Vec::new();
    for spec in &specs {
        for &algorithm in &config.algorithms {
            for &seed in &config.seeds {
                tasks.push((spec, algorithm, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building the worker pool")?;
    let mut rows: Vec<Row> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(spec, algorithm, seed)| run_row(spec, algorithm, seed, config, timing))
            .collect()
    });
    rows.sort_by(|a, b| {
        (a.instance.as_str(), a.algorithm, a.seed).cmp(&(b.instance.as_str(), b.algorithm, b.seed))
    });
    Ok(rows)
}

fn opt_string<T: ToString>(value: &Option<T>) -> String {
    value.as_ref().map(T::to_string).unwrap_or_default()
}

/// Writes rows as CSV. Floats use the shortest round-trip decimal form, so
/// equal runs produce byte-identical files.
pub fn write_csv(out: &mut impl Write, rows: &[Row], timing: bool) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec![
        "instance",
        "algorithm",
        "seed",
        "n",
        "value",
        "f_opt",
        "ratio",
        "oracle_calls",
        "status",
    ];
    if timing {
        header.push("wall_ms");
    }
    writer.write_record(&header)?;
    for row in rows {
        let mut record = vec![
            row.instance.clone(),
            row.algorithm.to_string(),
            row.seed.to_string(),
            row.n.to_string(),
            opt_string(&row.value),
            opt_string(&row.f_opt),
            opt_string(&row.ratio),
            opt_string(&row.oracle_calls),
            row.status.clone(),
        ];
        if timing {
            record.push(opt_string(&row.wall_ms));
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
