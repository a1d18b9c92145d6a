//! Output formatting: run reports, verification transcripts, trajectory CSV.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use submax::mcg::Trajectory;
use submax::pipeline::Chosen;
use submax::{brute_force_opt, GuaranteeReport, InstanceSpec, Polytope, SetFunction, WeightMode};

use crate::exec::{self, Algorithm, ExecOpts, Execution};

/// Everything the run command reports. Optional fields appear only for the
/// algorithms that produce them.
#[derive(Serialize)]
pub struct RunReport {
    pub instance: String,
    pub algorithm: &'static str,
    pub n: usize,
    pub seed: u64,
    pub mode: String,
    pub value: f64,
    pub oracle_calls: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_local: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_greedy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combined: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chosen: Option<Chosen>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guide_set: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub output: Vec<f64>,
}

fn mode_label(mode: WeightMode) -> String {
    match mode {
        WeightMode::Exact => "exact".to_string(),
        WeightMode::Sampled { samples } => format!("sampled({samples})"),
    }
}

fn chosen_label(chosen: Chosen) -> &'static str {
    match chosen {
        Chosen::Local => "local",
        Chosen::Greedy => "greedy",
    }
}

fn set_label(members: impl Iterator<Item = usize>) -> String {
    let inner = members.map(|u| u.to_string()).collect::<Vec<_>>().join(", ");
    format!("{{{inner}}}")
}

impl RunReport {
    pub fn new(
        spec: &InstanceSpec,
        algorithm: Algorithm,
        opts: &ExecOpts,
        execution: &Execution,
        want_ratio: bool,
        f: &SetFunction,
        p: &Polytope,
    ) -> Result<RunReport> {
        let main = execution.main.as_ref();
        let local = execution.local.as_ref();
        let (f_opt, ratio) = if want_ratio {
            let (_, f_opt) = brute_force_opt(f, p).context("computing the exhaustive optimum")?;
            let ratio = (f_opt > 0.0).then(|| execution.value / f_opt);
            (Some(f_opt), ratio)
        } else {
            (None, None)
        };
        Ok(RunReport {
            instance: spec.label(),
            algorithm: algorithm.name(),
            n: spec.n,
            seed: opts.seed,
            mode: mode_label(exec::effective_mode(opts, spec.n)?),
            value: execution.value,
            oracle_calls: execution.oracle_calls,
            rounds: (execution.rounds > 1).then_some(execution.rounds),
            value_local: main.map(|run| run.value_local),
            value_greedy: main.map(|run| run.value_greedy),
            combined: main.map(|run| run.combined),
            chosen: (algorithm == Algorithm::Main).then(|| main.expect("main run").chosen),
            guide_set: main.map(|run| run.z.members().collect()),
            gap: local.map(|ls| ls.gap),
            iterations: local.map(|ls| ls.iterations),
            converged: local.map(|ls| ls.converged),
            f_opt,
            ratio,
            output: execution.output_coords(algorithm),
        })
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "instance      {} (n = {})", self.instance, self.n);
        let _ = writeln!(out, "algorithm     {}", self.algorithm);
        let _ = writeln!(out, "mode          {}", self.mode);
        let _ = writeln!(out, "seed          {}", self.seed);
        let _ = writeln!(out, "value         {:.9}", self.value);
        let _ = writeln!(out, "oracle calls  {}", self.oracle_calls);
        if let Some(rounds) = self.rounds {
            let _ = writeln!(out, "rounds        {rounds} (value averaged over guide draws)");
        }
        if let Some(v) = self.value_local {
            let _ = writeln!(out, "local value   {v:.9}");
        }
        if let Some(v) = self.value_greedy {
            let _ = writeln!(out, "greedy value  {v:.9}");
        }
        if let Some(v) = self.combined {
            let _ = writeln!(out, "combined      {v:.9}");
        }
        if let Some(chosen) = self.chosen {
            let _ = writeln!(out, "chosen        {}", chosen_label(chosen));
        }
        if let Some(z) = &self.guide_set {
            let _ = writeln!(out, "guide set     {}", set_label(z.iter().copied()));
        }
        if let Some(gap) = self.gap {
            let _ = writeln!(out, "gap           {gap:.3e}");
        }
        if let Some(iterations) = self.iterations {
            let _ = writeln!(out, "iterations    {iterations}");
        }
        if let Some(converged) = self.converged {
            let _ = writeln!(out, "converged     {converged}");
        }
        if let Some(f_opt) = self.f_opt {
            let _ = writeln!(out, "f(OPT)        {f_opt:.9}");
        }
        if let Some(ratio) = self.ratio {
            let _ = writeln!(out, "ratio         {ratio:.4}");
        }
        let coords = self.output.iter().map(|c| format!("{c:.6}")).collect::<Vec<_>>();
        let _ = writeln!(out, "output        [{}]", coords.join(", "));
        out
    }
}

/// Human-readable transcript of a guarantee verification.
pub fn verify_text(spec: &InstanceSpec, report: &GuaranteeReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "instance         {} (n = {})", spec.label(), spec.n);
    let _ = writeln!(out, "OPT              {}", set_label(report.opt_set.members()));
    let _ = writeln!(out, "f(OPT)           {:.9}", report.f_opt);
    let _ = writeln!(out, "f(OPT minus Z)   {:.9}", report.f_opt_minus_z);
    let _ = writeln!(out, "f(OPT inter Z)   {:.9}", report.f_opt_inter_z);
    let _ = writeln!(out, "f(OPT union Z)   {:.9}", report.f_opt_union_z);
    let _ = writeln!(out, "local value      {:.9}", report.value_local);
    let _ = writeln!(out, "greedy value     {:.9}", report.value_greedy);
    let _ = writeln!(out, "final value      {:.9}", report.value_final);
    let _ = writeln!(out, "combined         {:.9}", report.combined);
    let _ = writeln!(out, "greedy floor     {:.9}", report.guarantee_rhs);
    let _ = writeln!(out, "combined floor   {:.9} (0.385 f(OPT))", report.ratio_bound);
    let _ = writeln!(out, "final margin     {:.9}", report.final_margin);
    let _ = writeln!(out, "combined margin  {:.9}", report.combined_margin);
    let _ = writeln!(
        out,
        "chain margin     {:.9} (minimum over {} grid points)",
        report.min_chain_margin,
        report.chain_margins.len()
    );
    let _ = writeln!(
        out,
        "exchange slack   {:.3e} (epsilon {:.3e}, scale {:.9})",
        report.exchange.worst_slack, report.exchange.epsilon, report.exchange.scale
    );
    for (name, pass) in report.verdicts.entries() {
        let _ = writeln!(out, "{name:<17}{}", if pass { "pass" } else { "FAIL" });
    }
    let _ = writeln!(out, "verdict: {}", if report.all_pass() { "PASS" } else { "FAIL" });
    out
}

/// Writes the recorded trajectory as CSV, one row per step and element,
/// with columns `t,u,y_u,x_u,w_u`.
pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["t", "u", "y_u", "x_u", "w_u"])?;
    for step in &trajectory.steps {
        let y = step.y.coords();
        let x = step.x.coords();
        for u in 0..y.len() {
            writer.write_record([
                step.t.to_string(),
                u.to_string(),
                y[u].to_string(),
                x[u].to_string(),
                step.weights[u].to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}
