//! Shared algorithm execution for the run, verify, and bench commands.

use anyhow::{bail, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use submax::local_search::{fractional_local_search, LocalSearchConfig, LocalSearchResult};
use submax::mcg::{
    measured_continuous_greedy, theory_sample_count, McgRun, Recording, Schedule, Trajectory,
};
use submax::pipeline::{
    main_algorithm, params_for_switch_time, MainParams, MainRun, RunOptions, Selection,
};
use submax::rng::{self, tags};
use submax::{Polytope, SetFunction, WeightMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Local search, guided greedy, randomized selection
    Main,
    /// Fractional local search only
    LocalSearch,
    /// Plain measured continuous greedy (no guide set)
    Mcg,
    /// Guide-set greedy stage of the pipeline (reports its value)
    AidedMcg,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Main => "main",
            Algorithm::LocalSearch => "local-search",
            Algorithm::Mcg => "mcg",
            Algorithm::AidedMcg => "aided-mcg",
        }
    }
}

/// Everything that shapes one algorithm execution.
pub struct ExecOpts {
    pub mode: WeightMode,
    pub seed: u64,
    pub switch_time: f64,
    pub p: f64,
    pub delta: f64,
    pub theory_schedule: bool,
    pub best_of_two: bool,
    /// Extra independent guide-set draws averaged into `value`
    /// (reporting only; ignored by guide-free algorithms).
    pub z_rounds: usize,
    /// Record the full trajectory of the greedy stage.
    pub record: bool,
}

/// A finished execution: the reported value (averaged over guide rounds
/// when requested), the oracle calls it consumed, and the stage results of
/// the first round.
pub struct Execution {
    pub value: f64,
    pub oracle_calls: u64,
    pub rounds: usize,
    pub main: Option<MainRun>,
    pub mcg: Option<McgRun>,
    pub local: Option<LocalSearchResult>,
}

impl Execution {
    pub fn trajectory(&self) -> Option<&Trajectory> {
        self.main
            .as_ref()
            .map(|run| &run.mcg.trajectory)
            .or_else(|| self.mcg.as_ref().map(|run| &run.trajectory))
    }

    /// The coordinates of the point the execution reports on.
    pub fn output_coords(&self, algorithm: Algorithm) -> Vec<f64> {
        let point = match algorithm {
            Algorithm::Main => &self.main.as_ref().expect("main run").output,
            Algorithm::AidedMcg => &self.main.as_ref().expect("main run").mcg.output,
            Algorithm::Mcg => &self.mcg.as_ref().expect("mcg run").output,
            Algorithm::LocalSearch => &self.local.as_ref().expect("local run").x,
        };
        point.coords().to_vec()
    }
}

/// Selection constants for a switch time and local probability: the closed
/// form fixes the (p1, p2) proportions, rescaled so `p1 + p2 = p`.
pub fn params_for(switch_time: f64, p: f64) -> Result<MainParams> {
    if !(p > 0.0 && p < 1.0) {
        bail!("p must lie strictly between 0 and 1");
    }
    let solution = params_for_switch_time(switch_time);
    // Split p in the closed-form proportions; these degenerate to 0:0 at a
    // zero switch time, where their limit puts all weight on p1.
    let (p1, p2) = if solution.p > 0.0 {
        let scale = p / solution.p;
        (solution.p1 * scale, solution.p2 * scale)
    } else {
        (p, 0.0)
    };
    let params = MainParams { switch_time, p, p1, p2, p3: 1.0 - p };
    params.validate()?;
    Ok(params)
}

pub fn effective_mode(opts: &ExecOpts, n: usize) -> Result<WeightMode> {
    Ok(match opts.mode {
        WeightMode::Sampled { .. } if opts.theory_schedule => {
            let samples = usize::try_from(theory_sample_count(n))
                .map_err(|_| anyhow::anyhow!("analyzed sample count overflows usize"))?;
            WeightMode::Sampled { samples }
        }
        mode => mode,
    })
}

fn steps_for(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta <= 1.0) {
        bail!("delta must lie in (0, 1]");
    }
    Ok(((1.0 / delta).round() as usize).max(1))
}

pub fn execute(
    f: &SetFunction,
    p: &Polytope,
    algorithm: Algorithm,
    opts: &ExecOpts,
) -> Result<Execution> {
    if opts.z_rounds == 0 {
        bail!("z-rounds must be at least 1");
    }
    let n = f.n();
    let calls_before = f.eval_count();
    let mode = effective_mode(opts, n)?;
    let recording = if opts.record { Recording::Full } else { Recording::EndpointsOnly };
    let mut execution = match algorithm {
        Algorithm::LocalSearch => {
            let cfg =
                LocalSearchConfig { mode, seed: opts.seed, ..LocalSearchConfig::default() };
            let local = fractional_local_search(f, p, &cfg)?;
            Execution {
                value: local.value,
                oracle_calls: 0,
                rounds: 1,
                main: None,
                mcg: None,
                local: Some(local),
            }
        }
        Algorithm::Mcg => {
            let steps = if opts.theory_schedule { n.pow(4) } else { steps_for(opts.delta)? };
            let run = measured_continuous_greedy(f, p, steps, mode, opts.seed, recording)?;
            Execution {
                value: run.value,
                oracle_calls: 0,
                rounds: 1,
                main: None,
                mcg: Some(run),
                local: None,
            }
        }
        Algorithm::Main | Algorithm::AidedMcg => {
            let params = params_for(opts.switch_time, opts.p)?;
            let schedule = if opts.theory_schedule {
                Schedule::theory(opts.switch_time, n)?
            } else {
                Schedule::with_step(opts.switch_time, opts.delta)?
            };
            let run_opts = RunOptions {
                params,
                schedule: Some(schedule),
                mode,
                local_search: LocalSearchConfig {
                    mode,
                    seed: opts.seed,
                    ..LocalSearchConfig::default()
                },
                selection: if opts.best_of_two {
                    Selection::BestOfTwo
                } else {
                    Selection::Randomized
                },
                recording,
                seed: opts.seed,
            };
            let first = main_algorithm(f, p, &run_opts)?;
            let mut total = round_value(algorithm, &first);
            for round in 1..opts.z_rounds {
                let mut extra = run_opts.clone();
                extra.seed = rng::mix(opts.seed, tags::BENCH, round as u64, 1);
                extra.local_search.seed = extra.seed;
                extra.recording = Recording::EndpointsOnly;
                let run = main_algorithm(f, p, &extra)?;
                total += round_value(algorithm, &run);
            }
            Execution {
                value: total / opts.z_rounds as f64,
                oracle_calls: 0,
                rounds: opts.z_rounds,
                local: Some(first.local.clone()),
                main: Some(first),
                mcg: None,
            }
        }
    };
    execution.oracle_calls = f.eval_count() - calls_before;
    Ok(execution)
}

fn round_value(algorithm: Algorithm, run: &MainRun) -> f64 {
    match algorithm {
        Algorithm::Main => run.value,
        Algorithm::AidedMcg => run.value_greedy,
        Algorithm::LocalSearch | Algorithm::Mcg => unreachable!("guide-free algorithm"),
    }
}
