//! Command line for the submax library: run algorithms on instance files,
//! sweep benchmarks, verify guarantees, solve the selection-probability
//! program, and generate instances.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 when a
//! verification run reports a failed guarantee.

mod bench;
mod exec;
mod instance;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use submax::{
    optimize_parameters, verify_run, ConstraintKind, FunctionKind, GeneratorConfig, WeightMode,
};

use exec::{Algorithm, ExecOpts};

#[derive(Parser)]
#[command(
    name = "submax",
    version,
    about = "Constrained non-monotone submodular maximization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one instance file
    Run(RunArgs),
    /// Run a config-driven benchmark sweep
    Bench(BenchArgs),
    /// Re-run an instance with full recording and check every guarantee
    Verify(VerifyArgs),
    /// Solve the selection-probability program
    OptimizeParams(OptimizeArgs),
    /// Generate random instances
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TextOrJson {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CsvOrJson {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Instance file (JSON)
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Algorithm::Main)]
    algorithm: Algorithm,
    /// How extension values and weights are computed
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Samples per estimated quantity in sampled mode
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Master seed; all randomness derives from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Switch time of the guided greedy phase
    #[arg(long = "t-s", default_value_t = 0.372)]
    t_s: f64,
    /// Probability of returning the local-search point
    #[arg(long, default_value_t = 0.23)]
    p: f64,
    /// Step size of the greedy time grid
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    /// Use the analyzed schedule: n^4 steps per phase, and in sampled mode
    /// the analyzed per-weight sample count (enormous for n beyond a few)
    #[arg(long)]
    theory_schedule: bool,
    /// Return the better of the two stages instead of randomizing
    #[arg(long)]
    best_of_two: bool,
    /// Average the guided stage over this many independent guide-set draws
    /// (reporting only; the guarantee is about a single draw)
    #[arg(long, default_value_t = 1)]
    z_rounds: usize,
    /// Write the recorded trajectory as CSV with columns t,u,y_u,x_u,w_u
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Also report the brute-force optimum and the value ratio (n <= 20)
    #[arg(long)]
    ratio: bool,
    #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
    out: TextOrJson,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Benchmark configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; 0 means one per core. Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Include a wall-clock milliseconds column (breaks byte-for-byte
    /// reproducibility of the output)
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value_t = CsvOrJson::Csv)]
    out: CsvOrJson,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Instance file (JSON)
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Switch time of the guided greedy phase
    #[arg(long = "t-s", default_value_t = 0.372)]
    t_s: f64,
    /// Probability of returning the local-search point
    #[arg(long, default_value_t = 0.23)]
    p: f64,
    /// Step size of the greedy time grid (verification default is finer
    /// than the run default)
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    /// Use the analyzed n^4-steps-per-phase schedule
    #[arg(long)]
    theory_schedule: bool,
    #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
    out: TextOrJson,
}

#[derive(clap::Args)]
struct OptimizeArgs {
    /// Grid cells per pass of the switch-time search
    #[arg(long, default_value_t = 1000)]
    resolution: usize,
    #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
    out: TextOrJson,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenFunction {
    Cut,
    Dicut,
    Coverage,
    Facility,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenConstraint {
    Cardinality,
    Partition,
    Knapsack,
}

#[derive(clap::Args)]
struct GenArgs {
    /// Objective family
    #[arg(long, value_enum, required_unless_present = "corpus")]
    function: Option<GenFunction>,
    /// Constraint family
    #[arg(long, value_enum, required_unless_present = "corpus")]
    constraint: Option<GenConstraint>,
    /// Ground-set size
    #[arg(short, long, required_unless_present = "corpus")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability of each candidate edge or incidence
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Universe size for coverage objectives (default 2n)
    #[arg(long)]
    universe: Option<usize>,
    /// Client count for facility-location objectives (default n)
    #[arg(long)]
    clients: Option<usize>,
    /// Write the instance to this file instead of stdout
    #[arg(long)]
    out_file: Option<PathBuf>,
    /// Write the fixed 54-instance verification corpus into this directory
    #[arg(long, value_name = "DIR", conflicts_with_all = ["function", "constraint", "n", "out_file"])]
    corpus: Option<PathBuf>,
}

fn main() -> ExitCode {
    // Die quietly when stdout closes early (e.g. `submax run ... | head`)
    // instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits with 2 on usage errors; this tool reserves 2 for
            // verification failures and reports usage problems as 1.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Verify(args) => cmd_verify(args),
        Command::OptimizeParams(args) => cmd_optimize(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn weight_mode(mode: Mode, samples: usize) -> Result<WeightMode> {
    match mode {
        Mode::Exact => Ok(WeightMode::Exact),
        Mode::Sampled => {
            if samples < 2 {
                bail!("sampled mode needs at least 2 samples per quantity");
            }
            Ok(WeightMode::Sampled { samples })
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<u8> {
    let spec = instance::load(&args.instance)?;
    let (f, p) = spec.instantiate()?;
    let opts = ExecOpts {
        mode: weight_mode(args.mode, args.samples)?,
        seed: args.seed,
        switch_time: args.t_s,
        p: args.p,
        delta: args.delta,
        theory_schedule: args.theory_schedule,
        best_of_two: args.best_of_two,
        z_rounds: args.z_rounds,
        record: args.trajectory.is_some(),
    };
    let execution = exec::execute(&f, &p, args.algorithm, &opts)?;
    if let Some(path) = &args.trajectory {
        let trajectory = execution
            .trajectory()
            .context("this algorithm records no trajectory")?;
        report::write_trajectory_csv(path, trajectory)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let run_report = report::RunReport::new(&spec, args.algorithm, &opts, &execution, args.ratio, &f, &p)?;
    match args.out {
        TextOrJson::Text => print!("{}", run_report.text()),
        TextOrJson::Json => println!("{}", serde_json::to_string_pretty(&run_report)?),
    }
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    let config = bench::load_config(&args.config)?;
    let rows = bench::run_benchmark(&config, args.workers, args.timing)?;
    let mut stdout = std::io::stdout().lock();
    match args.out {
        CsvOrJson::Csv => bench::write_csv(&mut stdout, &rows, args.timing)?,
        CsvOrJson::Json => {
            serde_json::to_writer_pretty(&mut stdout, &rows)?;
            use std::io::Write;
            writeln!(stdout)?;
        }
    }
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let spec = instance::load(&args.instance)?;
    let (f, p) = spec.instantiate()?;
    let opts = ExecOpts {
        mode: WeightMode::Exact,
        seed: args.seed,
        switch_time: args.t_s,
        p: args.p,
        delta: args.delta,
        theory_schedule: args.theory_schedule,
        best_of_two: false,
        z_rounds: 1,
        record: true,
    };
    let execution = exec::execute(&f, &p, Algorithm::Main, &opts)?;
    let run = execution.main.as_ref().expect("main algorithm returns a full run");
    let report = verify_run(&f, &p, run)?;
    match args.out {
        TextOrJson::Text => print!("{}", report::verify_text(&spec, &report)),
        TextOrJson::Json => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(if report.all_pass() { 0 } else { 2 })
}

fn cmd_optimize(args: OptimizeArgs) -> Result<u8> {
    let solution = optimize_parameters(args.resolution)?;
    match args.out {
        TextOrJson::Text => {
            println!("switch_time = {:.6}", solution.switch_time);
            println!("p1          = {:.6}", solution.p1);
            println!("p2          = {:.6}", solution.p2);
            println!("p3          = {:.6}", solution.p3);
            println!("p           = {:.6}", solution.p);
            println!("objective   = {:.10}", solution.objective);
        }
        TextOrJson::Json => println!("{}", serde_json::to_string_pretty(&solution)?),
    }
    Ok(0)
}

fn cmd_gen(args: GenArgs) -> Result<u8> {
    if let Some(dir) = &args.corpus {
        let written = instance::write_corpus(dir)?;
        println!("wrote {written} instances to {}", dir.display());
        return Ok(0);
    }
    let function = match args.function.expect("clap enforces presence") {
        GenFunction::Cut => FunctionKind::Cut,
        GenFunction::Dicut => FunctionKind::DirectedCut,
        GenFunction::Coverage => FunctionKind::Coverage,
        GenFunction::Facility => FunctionKind::FacilityLocation,
    };
    let constraint = match args.constraint.expect("clap enforces presence") {
        GenConstraint::Cardinality => ConstraintKind::Cardinality,
        GenConstraint::Partition => ConstraintKind::Partition,
        GenConstraint::Knapsack => ConstraintKind::Knapsack,
    };
    let n = args.n.expect("clap enforces presence");
    let config = GeneratorConfig {
        density: args.density,
        universe: args.universe,
        clients: args.clients,
    };
    let spec = submax::generate_instance(function, constraint, n, &config, args.seed)?;
    match &args.out_file {
        Some(path) => {
            instance::save(path, &spec)?;
            println!("wrote {} to {}", spec.label(), path.display());
        }
        None => println!("{}", serde_json::to_string_pretty(&spec)?),
    }
    Ok(0)
}
