//! Independent re-verification of finished runs on small instances.
//!
//! Nothing here trusts a value cached inside a run. The optimum comes from
//! exhaustive search, every function value from a fresh exact sweep, and the
//! greedy trajectory from a bit-exact replay of each recorded step. The
//! result is a [`GuaranteeReport`]: the recomputed quantities, the margins
//! against each bound, and one boolean verdict per checked property.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::extensions::{MultilinearEvaluator, Point, WeightMode};
use crate::local_search::{
    check_exchange_inequality, stationarity_gap, ExchangeCheck, DEFAULT_EPSILON,
};
use crate::mcg::{apply_update, BoundInputs, BoundTracker};
use crate::pipeline::{guarantee_ratio, MainRun};
use crate::polytope::Polytope;
use crate::set_function::{SetFunction, SubsetMask};

/// Largest ground set [`verify_run`] accepts: it enumerates subsets, polytope
/// vertices, and one exact sweep per recorded step.
pub const VERIFY_MAX_N: usize = 16;

/// Largest ground set [`brute_force_opt`] enumerates.
pub const BRUTE_FORCE_MAX_N: usize = 20;

/// Allowed shortfall of the greedy stage below its closed-form floor, as a
/// fraction of `f(OPT)`; absorbs the discretization error of the time grid.
pub const FINAL_BOUND_SLACK: f64 = 0.02;

/// Allowed shortfall of the combined value below `0.385 f(OPT)`.
pub const COMBINED_SLACK: f64 = 0.005;

/// Absolute tolerance for the per-coordinate growth caps.
const CAP_TOL: f64 = 1e-12;

/// Exhaustive maximum of `f` over the feasible sets `{S : 1_S in P}`.
///
/// Ties go to the numerically smallest bitmask, so the answer is unique.
/// Costs `2^n` oracle calls; requires `n <= BRUTE_FORCE_MAX_N`.
pub fn brute_force_opt(f: &SetFunction, p: &Polytope) -> Result<(SubsetMask, f64)> {
    let n = f.n();
    if p.dimension() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.dimension() });
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge { what: "exhaustive optimization", n, limit: BRUTE_FORCE_MAX_N });
    }
    let table = f.tabulate()?;
    let mut best_mask = None;
    let mut best = f64::NEG_INFINITY;
    for m in 0..(1u64 << n) {
        let s = SubsetMask::from_bit_index(n, m);
        if !p.contains_mask(&s) {
            continue;
        }
        let v = table.value(m as usize);
        if v > best {
            best = v;
            best_mask = Some(s);
        }
    }
    match best_mask {
        Some(s) => Ok((s, best)),
        None => Err(invalid("no feasible set; even the empty set was rejected")),
    }
}

/// One boolean per verified property.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Verdicts {
    /// Local-search point, greedy output, and returned point all lie in `P`.
    pub output_feasible: bool,
    /// Guide-set coordinates stay exactly zero through the first phase.
    pub z_freeze: bool,
    /// Every coordinate respects its growth cap `1 - prod (1 - delta_j)`,
    /// taken over the steps in which the element was allowed to grow.
    pub coordinate_caps: bool,
    /// Replaying the recorded trajectory from the origin reproduces every
    /// recorded weight vector, chosen vertex, and point bit for bit, and the
    /// returned point echoes the stage the selection named.
    pub update_identity: bool,
    /// The exchange inequality `2 F(x) >= F(x ^ y) + F(x v y) - 2 eps scale`
    /// holds at the local-search point for every vertex `y` of `P`.
    pub exchange: bool,
    /// `F(y(t)) + slack >= g(t)` at every recorded grid time.
    pub bound_chain: bool,
    /// The greedy value clears the closed-form floor minus
    /// [`FINAL_BOUND_SLACK`]` * f(OPT)`.
    pub final_bound: bool,
    /// The combined value clears `(0.385 - `[`COMBINED_SLACK`]`) * f(OPT)`.
    pub combined_bound: bool,
}

impl Verdicts {
    pub fn all_pass(&self) -> bool {
        self.entries().iter().all(|&(_, ok)| ok)
    }

    /// Named verdicts in report order, for tabular output.
    pub fn entries(&self) -> [(&'static str, bool); 8] {
        [
            ("output-feasible", self.output_feasible),
            ("z-freeze", self.z_freeze),
            ("coordinate-caps", self.coordinate_caps),
            ("update-identity", self.update_identity),
            ("exchange", self.exchange),
            ("bound-chain", self.bound_chain),
            ("final-bound", self.final_bound),
            ("combined-bound", self.combined_bound),
        ]
    }
}

/// Everything [`verify_run`] recomputed, with margins and verdicts.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GuaranteeReport {
    /// Exhaustive optimum (ties to the numerically smallest mask).
    pub opt_set: SubsetMask,
    pub f_opt: f64,
    pub f_opt_minus_z: f64,
    pub f_opt_inter_z: f64,
    pub f_opt_union_z: f64,
    /// Exact `F` at the local-search point.
    pub value_local: f64,
    /// Exact `F` at the greedy output.
    pub value_greedy: f64,
    /// Exact `F` at the returned point.
    pub value_final: f64,
    /// `p * value_local + (1 - p) * value_greedy`, recomputed.
    pub combined: f64,
    /// Closed-form floor for the greedy value.
    pub guarantee_rhs: f64,
    /// `0.385 * f(OPT)`: the headline target for the combined value.
    pub ratio_bound: f64,
    /// `value_greedy - (guarantee_rhs - FINAL_BOUND_SLACK * f_opt)`.
    pub final_margin: f64,
    /// `combined - (ratio_bound - COMBINED_SLACK * f_opt)`.
    pub combined_margin: f64,
    /// `F(y(t_i)) + slack - g(t_i)` at every recorded grid time, endpoints
    /// included.
    pub chain_margins: Vec<f64>,
    pub min_chain_margin: f64,
    pub exchange: ExchangeCheck,
    /// The bound recursion recomputed from the brute-force quantities.
    pub tracker: BoundTracker,
    pub verdicts: Verdicts,
}

impl GuaranteeReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.all_pass()
    }
}

/// Re-verifies a finished pipeline run against every guarantee.
///
/// Needs `n <= VERIFY_MAX_N`, an exact-mode greedy stage, and a fully
/// recorded trajectory. The instance must have `f(OPT) > 0`; a zero optimum
/// makes every relative bound vacuous.
pub fn verify_run(f: &SetFunction, p: &Polytope, run: &MainRun) -> Result<GuaranteeReport> {
    let n = f.n();
    if p.dimension() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.dimension() });
    }
    if run.output.len() != n || run.z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: run.output.len() });
    }
    if n > VERIFY_MAX_N {
        return Err(Error::TooLarge { what: "run verification", n, limit: VERIFY_MAX_N });
    }
    if !matches!(run.mcg.mode, WeightMode::Exact) {
        return Err(invalid("verification replays exact-mode runs only"));
    }
    if run.z != run.mcg.z {
        return Err(invalid("run and greedy stage disagree on the guide set"));
    }
    let schedule = run.mcg.schedule;
    let steps = &run.mcg.trajectory.steps;
    if steps.len() != schedule.total_steps() || steps.iter().enumerate().any(|(i, s)| s.index != i)
    {
        return Err(invalid("verification needs a fully recorded trajectory"));
    }

    let (opt_set, f_opt) = brute_force_opt(f, p)?;
    if !(f_opt > 0.0) {
        return Err(invalid("verification needs a positive optimum value"));
    }
    let z = &run.z;
    let f_opt_minus_z = f.evaluate(&opt_set.difference(z));
    let f_opt_inter_z = f.evaluate(&opt_set.intersection(z));
    let f_opt_union_z = f.evaluate(&opt_set.union(z));
    let eval = MultilinearEvaluator::new(f)?;
    let inputs = BoundInputs {
        f_opt,
        f_opt_minus_z,
        f_opt_inter_z,
        f_opt_union_z,
        value_scale: eval.max_value(),
    };
    let tracker = BoundTracker::compute(&schedule, &inputs, n);

    let value_local = eval.value(run.x_local());
    let value_greedy = eval.value(run.x_greedy());
    let value_final = eval.value(&run.output);
    let combined = run.params.p * value_local + (1.0 - run.params.p) * value_greedy;

    let output_feasible =
        p.contains(run.x_local()) && p.contains(run.x_greedy()) && p.contains(&run.output);

    let mut z_freeze = true;
    for step in steps.iter().take(schedule.phase1_steps()) {
        for u in z.members() {
            z_freeze &= step.y.coord(u) == 0.0 && step.x.coord(u) == 0.0;
        }
    }
    let at_switch = steps
        .get(schedule.phase1_steps())
        .map(|s| &s.y)
        .unwrap_or(&run.mcg.trajectory.final_point);
    for u in z.members() {
        z_freeze &= at_switch.coord(u) == 0.0;
    }

    // The update is monotone in y, so a coordinate that grows in every step
    // with x_u = 1 dominates the real trajectory. Guide-set elements only
    // grow after the switch.
    let mut coordinate_caps = true;
    let mut cap_all = 0.0;
    let mut cap_guide = 0.0;
    let check_caps = |point: &Point, cap_all: f64, cap_guide: f64, ok: &mut bool| {
        for u in 0..n {
            let cap = if z.contains(u) { cap_guide } else { cap_all };
            *ok &= point.coord(u) <= cap + CAP_TOL;
        }
    };
    for (i, step) in steps.iter().enumerate() {
        check_caps(&step.y, cap_all, cap_guide, &mut coordinate_caps);
        let d = schedule.step_delta(i);
        cap_all += d * (1.0 - cap_all);
        if !schedule.is_phase1(i) {
            cap_guide += d * (1.0 - cap_guide);
        }
    }
    check_caps(&run.mcg.trajectory.final_point, cap_all, cap_guide, &mut coordinate_caps);

    let mut update_identity = true;
    let mut y = Point::zeros(n);
    for (i, step) in steps.iter().enumerate() {
        if step.y.coords() != y.coords() {
            update_identity = false;
            break;
        }
        let weights = eval.weights(&y);
        if step.weights != weights {
            update_identity = false;
            break;
        }
        let x = if schedule.is_phase1(i) {
            let mut adjusted = weights.clone();
            for u in z.members() {
                adjusted[u] = -1.0;
            }
            p.maximize_linear(&adjusted)
        } else {
            p.maximize_linear(&weights)
        };
        if x.point().coords() != step.x.coords() {
            update_identity = false;
            break;
        }
        y = apply_update(&y, x.point(), schedule.step_delta(i));
    }
    update_identity &= run.mcg.trajectory.final_point.coords() == y.coords()
        && run.mcg.output.coords() == y.coords();
    let echoed = match run.chosen {
        crate::pipeline::Chosen::Local => run.x_local(),
        crate::pipeline::Chosen::Greedy => run.x_greedy(),
    };
    update_identity &= run.output.coords() == echoed.coords();

    // The exchange inequality is checked at the tolerance the local search
    // actually achieved (never below the default), with f(OPT) as the scale.
    let gap = stationarity_gap(f, p, run.x_local())?;
    let epsilon = (gap / (2.0 * f_opt)).max(DEFAULT_EPSILON);
    let exchange = check_exchange_inequality(f, p, run.x_local(), epsilon, Some(f_opt))?;

    let slack = tracker.discretization_slack;
    let mut chain_margins = Vec::with_capacity(steps.len() + 1);
    for (i, step) in steps.iter().enumerate() {
        chain_margins.push(eval.value(&step.y) + slack - tracker.grid[i].1);
    }
    let final_value = eval.value(&run.mcg.trajectory.final_point);
    chain_margins.push(final_value + slack - tracker.grid[steps.len()].1);
    let min_chain_margin = chain_margins.iter().copied().fold(f64::INFINITY, f64::min);

    let ratio_bound = guarantee_ratio() * f_opt;
    let final_margin = value_greedy - (tracker.rhs - FINAL_BOUND_SLACK * f_opt);
    let combined_margin = combined - (ratio_bound - COMBINED_SLACK * f_opt);

    let verdicts = Verdicts {
        output_feasible,
        z_freeze,
        coordinate_caps,
        update_identity,
        exchange: exchange.holds,
        bound_chain: min_chain_margin >= 0.0,
        final_bound: final_margin >= 0.0,
        combined_bound: combined_margin >= 0.0,
    };
    Ok(GuaranteeReport {
        opt_set,
        f_opt,
        f_opt_minus_z,
        f_opt_inter_z,
        f_opt_union_z,
        value_local,
        value_greedy,
        value_final,
        combined,
        guarantee_rhs: tracker.rhs,
        ratio_bound,
        final_margin,
        combined_margin,
        chain_margins,
        min_chain_margin,
        exchange,
        tracker,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcg::{Recording, Schedule};
    use crate::pipeline::{main_algorithm, RunOptions};
    use alloc::vec;

    fn triangle_cut() -> SetFunction {
        SetFunction::graph_cut(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn verified_run() -> (SetFunction, Polytope, MainRun) {
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 1).unwrap();
        let opts = RunOptions {
            schedule: Some(Schedule::with_step(0.372, 0.002).unwrap()),
            recording: Recording::Full,
            seed: 7,
            ..RunOptions::default()
        };
        let run = main_algorithm(&f, &p, &opts).unwrap();
        (f, p, run)
    }

    #[test]
    fn brute_force_finds_the_triangle_optimum() {
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 1).unwrap();
        let (s, v) = brute_force_opt(&f, &p).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(s.bit_index(), 1);
    }

    #[test]
    fn brute_force_on_the_zero_function_returns_the_empty_set() {
        let f = SetFunction::explicit_table(3, vec![0.0; 8]).unwrap();
        let p = Polytope::hypercube(3).unwrap();
        let (s, v) = brute_force_opt(&f, &p).unwrap();
        assert_eq!(s.count(), 0);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn brute_force_takes_the_full_set_on_a_monotone_function() {
        let weights = vec![1.0, 2.0, 3.0, 4.0];
        let covers = vec![vec![0], vec![1], vec![2], vec![3]];
        let f = SetFunction::coverage(4, weights, covers).unwrap();
        let p = Polytope::cardinality(4, 4).unwrap();
        let (s, v) = brute_force_opt(&f, &p).unwrap();
        assert_eq!(s.count(), 4);
        assert!((v - 10.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_breaks_ties_toward_the_smallest_mask() {
        let f = SetFunction::explicit_table(2, vec![0.0, 5.0, 5.0, 3.0]).unwrap();
        let p = Polytope::hypercube(2).unwrap();
        let (s, v) = brute_force_opt(&f, &p).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(s.bit_index(), 1);
    }

    #[test]
    fn brute_force_rejects_oversized_instances() {
        let f = SetFunction::graph_cut(21, vec![(0, 1, 1.0)]).unwrap();
        let p = Polytope::hypercube(21).unwrap();
        assert!(matches!(
            brute_force_opt(&f, &p),
            Err(Error::TooLarge { limit: BRUTE_FORCE_MAX_N, .. })
        ));
    }

    #[test]
    fn a_clean_run_passes_every_verdict() {
        let (f, p, run) = verified_run();
        let report = verify_run(&f, &p, &run).unwrap();
        assert!(report.all_pass(), "verdicts: {:?}", report.verdicts);
        assert_eq!(report.f_opt, 2.0);
        assert_eq!(report.opt_set.bit_index(), 1);
        assert_eq!(report.chain_margins.len(), run.mcg.schedule.total_steps() + 1);
        assert!(report.min_chain_margin >= 0.0);
        assert!(report.final_margin >= 0.0);
        assert!(report.combined_margin >= 0.0);
        assert!(report.combined >= 0.38 * report.f_opt);
        assert!(report.exchange.holds);
        assert_eq!(report.verdicts.entries().len(), 8);
    }

    #[test]
    fn a_corrupted_trajectory_step_is_detected() {
        let (f, p, run) = verified_run();
        let mut bad = run.clone();
        let mid = bad.mcg.trajectory.steps.len() / 2;
        let step = &mut bad.mcg.trajectory.steps[mid];
        let u = 1;
        step.y.set_coord(u, (step.y.coord(u) + 0.37).min(1.0));
        let report = verify_run(&f, &p, &bad).unwrap();
        assert!(!report.verdicts.update_identity);
        assert!(!report.all_pass());
    }

    #[test]
    fn a_corrupted_output_fails_feasibility() {
        let (f, p, run) = verified_run();
        let mut bad = run.clone();
        bad.output = Point::ones(3);
        let report = verify_run(&f, &p, &bad).unwrap();
        assert!(!report.verdicts.output_feasible);
        assert!(!report.verdicts.update_identity);
    }

    #[test]
    fn a_sub_bound_greedy_output_fails_the_final_bound() {
        let (f, p, run) = verified_run();
        let mut bad = run.clone();
        bad.mcg.output = Point::zeros(3);
        bad.mcg.trajectory.final_point = Point::zeros(3);
        let report = verify_run(&f, &p, &bad).unwrap();
        assert!(!report.verdicts.final_bound);
        assert!(!report.verdicts.update_identity);
    }

    #[test]
    fn verification_requires_a_full_trajectory() {
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 1).unwrap();
        let opts = RunOptions {
            schedule: Some(Schedule::with_step(0.372, 0.01).unwrap()),
            recording: Recording::EndpointsOnly,
            seed: 7,
            ..RunOptions::default()
        };
        let run = main_algorithm(&f, &p, &opts).unwrap();
        assert!(verify_run(&f, &p, &run).is_err());
    }

    #[test]
    fn verification_requires_a_positive_optimum() {
        let f = SetFunction::explicit_table(3, vec![0.0; 8]).unwrap();
        let p = Polytope::cardinality(3, 1).unwrap();
        let opts = RunOptions {
            schedule: Some(Schedule::with_step(0.372, 0.01).unwrap()),
            recording: Recording::Full,
            seed: 7,
            ..RunOptions::default()
        };
        let run = main_algorithm(&f, &p, &opts).unwrap();
        assert!(verify_run(&f, &p, &run).is_err());
    }

    #[test]
    fn report_margins_match_the_verdicts() {
        let (f, p, run) = verified_run();
        let report = verify_run(&f, &p, &run).unwrap();
        assert_eq!(report.verdicts.final_bound, report.final_margin >= 0.0);
        assert_eq!(report.verdicts.combined_bound, report.combined_margin >= 0.0);
        assert_eq!(report.verdicts.bound_chain, report.min_chain_margin >= 0.0);
        let recomputed = run.params.p * report.value_local + (1.0 - run.params.p) * report.value_greedy;
        assert_eq!(report.combined, recomputed);
        assert_eq!(report.ratio_bound, guarantee_ratio() * report.f_opt);
    }
}
