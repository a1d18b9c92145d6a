//! Aided measured continuous greedy.
//!
//! The solution `y` starts at the origin and grows through `y' = y +
//! delta (1 - y) o x`, where `x` maximizes the current element weights
//! `w_u = F(y v 1_u) - F(y)` over the polytope. Before the switch time the
//! weights of the guide set `Z` are overridden to `-1`, so no mass enters
//! `Z` (the maximizer of a down-closed polytope puts zero on negative
//! weights); afterwards the algorithm runs unrestricted.
//!
//! The module also carries the bound side: the closed-form guarantees
//! ([`phase1_bound`], [`phase2_bound`], [`guarantee_rhs`]) and the
//! discrete recursion connecting them to the trajectory
//! ([`BoundTracker`]), so a run can be checked step by step against the
//! value it is supposed to reach.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::extensions::{
    estimate_multilinear, estimate_weight, MultilinearEvaluator, Point, WeightMode,
};
use crate::polytope::Polytope;
use crate::rng::{self, tags};
use crate::set_function::{SetFunction, SubsetMask};

/// Coefficient of the `n^2 * delta * scale` discretization slack allowance.
pub const SLACK_COEFF: f64 = 2.0;

/// Two-phase step schedule on `[0, 1]`. The time grid hits the switch time
/// and `1` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    switch_time: f64,
    phase1_steps: usize,
    phase2_steps: usize,
}

impl Schedule {
    /// Schedule with steps of roughly `delta` in both phases.
    pub fn with_step(switch_time: f64, delta: f64) -> Result<Schedule> {
        check_switch_time(switch_time)?;
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(invalid("step size must lie in (0, 1]"));
        }
        let phase1_steps = if switch_time == 0.0 {
            0
        } else {
            (libm::round(switch_time / delta) as usize).max(1)
        };
        let phase2_steps = (libm::round((1.0 - switch_time) / delta) as usize).max(1);
        Ok(Schedule { switch_time, phase1_steps, phase2_steps })
    }

    /// The analyzed schedule: `n^4` steps per phase.
    pub fn theory(switch_time: f64, n: usize) -> Result<Schedule> {
        check_switch_time(switch_time)?;
        if n == 0 {
            return Err(invalid("ground set must not be empty"));
        }
        let steps = n.pow(4);
        let phase1_steps = if switch_time == 0.0 { 0 } else { steps };
        Ok(Schedule { switch_time, phase1_steps, phase2_steps: steps })
    }

    pub fn switch_time(&self) -> f64 {
        self.switch_time
    }

    pub fn phase1_steps(&self) -> usize {
        self.phase1_steps
    }

    pub fn phase2_steps(&self) -> usize {
        self.phase2_steps
    }

    pub fn total_steps(&self) -> usize {
        self.phase1_steps + self.phase2_steps
    }

    /// Step size used during the first phase (0 when the phase is empty).
    pub fn delta1(&self) -> f64 {
        if self.phase1_steps == 0 {
            0.0
        } else {
            self.switch_time / self.phase1_steps as f64
        }
    }

    /// Step size used during the second phase.
    pub fn delta2(&self) -> f64 {
        (1.0 - self.switch_time) / self.phase2_steps as f64
    }

    pub fn is_phase1(&self, step: usize) -> bool {
        step < self.phase1_steps
    }

    /// Step size of step `step`.
    pub fn step_delta(&self, step: usize) -> f64 {
        if self.is_phase1(step) {
            self.delta1()
        } else {
            self.delta2()
        }
    }

    pub fn max_delta(&self) -> f64 {
        if self.phase1_steps == 0 {
            self.delta2()
        } else {
            self.delta1().max(self.delta2())
        }
    }

    /// Time before step `i` (so `time_at(0) = 0` and
    /// `time_at(total_steps()) = 1`). The values at the phase boundary and
    /// at the end are exact.
    pub fn time_at(&self, step: usize) -> f64 {
        debug_assert!(step <= self.total_steps());
        if step == 0 {
            return 0.0;
        }
        if step == self.phase1_steps {
            return self.switch_time;
        }
        if step == self.total_steps() {
            return 1.0;
        }
        if step < self.phase1_steps {
            self.switch_time * (step as f64 / self.phase1_steps as f64)
        } else {
            let into = (step - self.phase1_steps) as f64 / self.phase2_steps as f64;
            self.switch_time + (1.0 - self.switch_time) * into
        }
    }
}

fn check_switch_time(switch_time: f64) -> Result<()> {
    if !(switch_time.is_finite() && (0.0..1.0).contains(&switch_time)) {
        return Err(invalid("switch time must lie in [0, 1)"));
    }
    Ok(())
}

/// Per-weight sample count used by the analysis: `ceil(48 n^6 ln(2n))`.
pub fn theory_sample_count(n: usize) -> u64 {
    assert!(n >= 1);
    let nf = n as f64;
    libm::ceil(48.0 * libm::pow(nf, 6.0) * libm::log(2.0 * nf)) as u64
}

/// Which steps to keep in the returned [`Trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recording {
    /// Every step: enough to replay the whole run.
    Full,
    /// Every k-th step.
    EveryKth(usize),
    /// Only the final point.
    EndpointsOnly,
}

impl Recording {
    fn keeps(&self, step: usize) -> bool {
        match *self {
            Recording::Full => true,
            Recording::EveryKth(k) => k > 0 && step % k == 0,
            Recording::EndpointsOnly => false,
        }
    }
}

/// State of one recorded step: the point and time before the step, the raw
/// element weights (before any guide-set override), and the chosen vertex.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryStep {
    pub index: usize,
    pub t: f64,
    pub y: Point,
    pub x: Point,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub final_point: Point,
}

/// The instance-level quantities the guarantees are written against.
/// `f_opt*` values refer to a fixed optimal feasible set `OPT` and the
/// guide set `Z`; `value_scale` bounds `max_S f(S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundInputs {
    pub f_opt: f64,
    pub f_opt_minus_z: f64,
    pub f_opt_inter_z: f64,
    pub f_opt_union_z: f64,
    pub value_scale: f64,
}

/// One growth step `y + delta (1 - y) o x`, clamped into the unit cube
/// (the real value never leaves it; the clamp only absorbs rounding).
/// Verification re-derives updates through this same function, so replayed
/// trajectories match bit for bit.
pub fn apply_update(y: &Point, x: &Point, delta: f64) -> Point {
    debug_assert_eq!(y.len(), x.len());
    debug_assert!((0.0..=1.0).contains(&delta));
    let coords: Vec<f64> = y
        .coords()
        .iter()
        .zip(x.coords())
        .map(|(&yu, &xu)| (yu + delta * (1.0 - yu) * xu).clamp(0.0, 1.0))
        .collect();
    Point::from_vec(coords).expect("update stays in the unit cube")
}

/// Final lower bound on `F(y(1))`:
/// `e^{ts-1} [(2 - ts - e^{-ts}) f(OPT) - (1 - e^{-ts}) f(OPT n Z)
///  - (2 - ts - 2 e^{-ts}) f(OPT u Z)]`.
pub fn guarantee_rhs(switch_time: f64, f_opt: f64, f_opt_inter_z: f64, f_opt_union_z: f64) -> f64 {
    let emts = libm::exp(-switch_time);
    libm::exp(switch_time - 1.0)
        * ((2.0 - switch_time - emts) * f_opt
            - (1.0 - emts) * f_opt_inter_z
            - (2.0 - switch_time - 2.0 * emts) * f_opt_union_z)
}

/// Closed-form lower bound on the recursion during the first phase:
/// `(1 - e^{-t}) f(OPT \ Z) - (1 - e^{-t} - t e^{-t}) f(OPT u Z)`.
pub fn phase1_bound(t: f64, f_opt_minus_z: f64, f_opt_union_z: f64) -> f64 {
    let emt = libm::exp(-t);
    (1.0 - emt) * f_opt_minus_z - (1.0 - emt - t * emt) * f_opt_union_z
}

/// Closed-form lower bound during the second phase, continuing from
/// `bound_at_switch` at the switch time. Evaluating at the switch time
/// returns `bound_at_switch` unchanged.
pub fn phase2_bound(
    t: f64,
    switch_time: f64,
    f_opt: f64,
    f_opt_union_z: f64,
    bound_at_switch: f64,
) -> f64 {
    let emts = libm::exp(-switch_time);
    let drive = emts * f_opt + (1.0 - emts) * (f_opt - f_opt_union_z).max(0.0);
    libm::exp(switch_time - t) * ((t - switch_time) * drive + bound_at_switch)
}

/// One step of the discrete bound recursion: `g + delta (drive - g)`.
pub fn bound_recursion(g: f64, delta: f64, drive: f64) -> f64 {
    g + delta * (drive - g)
}

fn phase1_drive(t: f64, inputs: &BoundInputs) -> f64 {
    inputs.f_opt_minus_z - (1.0 - libm::exp(-t)) * inputs.f_opt_union_z
}

fn phase2_drive(t: f64, switch_time: f64, inputs: &BoundInputs) -> f64 {
    let emt = libm::exp(-t);
    emt * inputs.f_opt
        + (libm::exp(switch_time - t) - emt) * (inputs.f_opt - inputs.f_opt_union_z).max(0.0)
}

/// The discrete guarantee recursion evaluated on a schedule's grid,
/// together with the closed forms it dominates and the discretization
/// allowance `SLACK_COEFF * n^2 * max_delta * value_scale`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundTracker {
    /// `(t_i, g(t_i))` for every grid time, including both endpoints.
    pub grid: Vec<(f64, f64)>,
    /// `g` at the switch time.
    pub switch_bound: f64,
    /// `g(1)`.
    pub recursion_final: f64,
    /// [`phase1_bound`] at the switch time.
    pub closed_form_switch: f64,
    /// [`phase2_bound`] at time 1.
    pub closed_form_final: f64,
    /// [`guarantee_rhs`] for the same inputs.
    pub rhs: f64,
    pub discretization_slack: f64,
    pub inputs: BoundInputs,
}

impl BoundTracker {
    pub fn compute(schedule: &Schedule, inputs: &BoundInputs, n: usize) -> BoundTracker {
        let ts = schedule.switch_time();
        let total = schedule.total_steps();
        let mut grid = Vec::with_capacity(total + 1);
        let mut g = 0.0;
        grid.push((0.0, g));
        for i in 0..total {
            let t = schedule.time_at(i);
            let drive = if schedule.is_phase1(i) {
                phase1_drive(t, inputs)
            } else {
                phase2_drive(t, ts, inputs)
            };
            g = bound_recursion(g, schedule.step_delta(i), drive);
            grid.push((schedule.time_at(i + 1), g));
        }
        let switch_bound = grid[schedule.phase1_steps()].1;
        let closed_form_switch = phase1_bound(ts, inputs.f_opt_minus_z, inputs.f_opt_union_z);
        let closed_form_final =
            phase2_bound(1.0, ts, inputs.f_opt, inputs.f_opt_union_z, closed_form_switch);
        let rhs = guarantee_rhs(ts, inputs.f_opt, inputs.f_opt_inter_z, inputs.f_opt_union_z);
        let discretization_slack =
            SLACK_COEFF * (n * n) as f64 * schedule.max_delta() * inputs.value_scale;
        BoundTracker {
            grid,
            switch_bound,
            recursion_final: g,
            closed_form_switch,
            closed_form_final,
            rhs,
            discretization_slack,
            inputs: *inputs,
        }
    }
}

/// A finished run: the output point, its value (exact when the instance is
/// small enough to sweep, otherwise an estimate), the recorded trajectory,
/// and the echo of every input needed to replay the run.
#[derive(Debug, Clone)]
pub struct McgRun {
    pub output: Point,
    pub value: f64,
    pub trajectory: Trajectory,
    pub tracker: Option<BoundTracker>,
    pub schedule: Schedule,
    pub z: SubsetMask,
    pub seed: u64,
    pub mode: WeightMode,
}

/// Runs aided measured continuous greedy with guide set `z`.
///
/// Exact mode needs `n <= 25`; sampled mode draws `samples` sets per weight
/// from a substream keyed by `(seed, step, element)`, so a seed pins the
/// whole run. When `bound_inputs` is supplied the matching [`BoundTracker`]
/// is attached to the result.
#[allow(clippy::too_many_arguments)]
pub fn aided_mcg(
    f: &SetFunction,
    p: &Polytope,
    z: &SubsetMask,
    schedule: &Schedule,
    mode: WeightMode,
    seed: u64,
    recording: Recording,
    bound_inputs: Option<&BoundInputs>,
) -> Result<McgRun> {
    let n = f.n();
    if p.dimension() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.dimension() });
    }
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: z.len() });
    }
    if let WeightMode::Sampled { samples } = mode {
        if samples < 1 {
            return Err(invalid("sampled mode needs at least 1 sample per weight"));
        }
    }
    let eval = match mode {
        WeightMode::Exact => Some(MultilinearEvaluator::new(f)?),
        WeightMode::Sampled { .. } => None,
    };
    let mut y = Point::zeros(n);
    let mut steps = Vec::new();
    let total = schedule.total_steps();
    let mut weights = vec_with_len(n);
    for step in 0..total {
        let t = schedule.time_at(step);
        match (&eval, mode) {
            (Some(eval), _) => {
                let w = eval.weights(&y);
                weights.copy_from_slice(&w);
            }
            (None, WeightMode::Sampled { samples }) => {
                for (u, w) in weights.iter_mut().enumerate() {
                    let mut stream = rng::substream(seed, tags::WEIGHT, step as u64, u as u64);
                    *w = estimate_weight(f, &y, u, samples, &mut stream);
                }
            }
            (None, WeightMode::Exact) => unreachable!(),
        }
        let x = if schedule.is_phase1(step) {
            let mut adjusted = weights.clone();
            for u in z.members() {
                adjusted[u] = -1.0;
            }
            p.maximize_linear(&adjusted)
        } else {
            p.maximize_linear(&weights)
        };
        if recording.keeps(step) {
            steps.push(TrajectoryStep {
                index: step,
                t,
                y: y.clone(),
                x: x.point().clone(),
                weights: weights.clone(),
            });
        }
        y = apply_update(&y, x.point(), schedule.step_delta(step));
    }
    let value = match (&eval, mode) {
        (Some(eval), _) => eval.value(&y),
        (None, WeightMode::Sampled { samples }) => {
            let count = (samples as u64).max(16);
            estimate_multilinear(f, &y, count, rng::mix(seed, tags::OUTPUT_ESTIMATE, 0, 0))?.mean
        }
        (None, WeightMode::Exact) => unreachable!(),
    };
    let tracker = bound_inputs.map(|inputs| BoundTracker::compute(schedule, inputs, n));
    Ok(McgRun {
        output: y.clone(),
        value,
        trajectory: Trajectory { steps, final_point: y },
        tracker,
        schedule: *schedule,
        z: z.clone(),
        seed,
        mode,
    })
}

/// Plain measured continuous greedy: no guide set, single phase of `steps`
/// equal steps.
pub fn measured_continuous_greedy(
    f: &SetFunction,
    p: &Polytope,
    steps: usize,
    mode: WeightMode,
    seed: u64,
    recording: Recording,
) -> Result<McgRun> {
    if steps == 0 {
        return Err(invalid("measured continuous greedy needs at least one step"));
    }
    let schedule = Schedule { switch_time: 0.0, phase1_steps: 0, phase2_steps: steps };
    aided_mcg(f, p, &SubsetMask::empty(f.n()), &schedule, mode, seed, recording, None)
}

fn vec_with_len(n: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(n);
    v.resize(n, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Polytope;
    use alloc::vec;

    fn triangle_cut() -> SetFunction {
        SetFunction::graph_cut(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn inputs() -> BoundInputs {
        BoundInputs {
            f_opt: 1.0,
            f_opt_minus_z: 0.8,
            f_opt_inter_z: 0.3,
            f_opt_union_z: 0.9,
            value_scale: 1.0,
        }
    }

    #[test]
    fn schedule_grid_is_exact_at_boundaries() {
        let s = Schedule::with_step(0.372, 0.01).unwrap();
        assert_eq!(s.time_at(0), 0.0);
        assert_eq!(s.time_at(s.phase1_steps()), 0.372);
        assert_eq!(s.time_at(s.total_steps()), 1.0);
        for i in 0..s.total_steps() {
            assert!(s.time_at(i) < s.time_at(i + 1));
        }
    }

    #[test]
    fn schedule_step_counts_round_to_nearest() {
        let s = Schedule::with_step(0.372, 0.01).unwrap();
        assert_eq!(s.phase1_steps(), 37);
        assert_eq!(s.phase2_steps(), 63);
        let zero = Schedule::with_step(0.0, 0.25).unwrap();
        assert_eq!(zero.phase1_steps(), 0);
        assert_eq!(zero.phase2_steps(), 4);
        assert_eq!(zero.delta1(), 0.0);
    }

    #[test]
    fn theory_schedule_and_sample_count() {
        let s = Schedule::theory(0.372, 10).unwrap();
        assert_eq!(s.phase1_steps(), 10_000);
        assert_eq!(s.phase2_steps(), 10_000);
        assert_eq!(theory_sample_count(4), 408_835);
        assert_eq!(theory_sample_count(6), 5_564_919);
        assert_eq!(theory_sample_count(10), 143_795_150);
    }

    #[test]
    fn phase1_bound_frozen_values() {
        // With both inputs 1 the bound collapses to t e^{-t}.
        assert!((phase1_bound(0.372, 1.0, 1.0) - 0.2564397782190107).abs() < 1e-15);
        assert_eq!(phase1_bound(0.0, 0.8, 0.9), 0.0);
        for t in [0.1, 0.25, 0.372, 0.9] {
            let direct = t * libm::exp(-t);
            assert!((phase1_bound(t, 1.0, 1.0) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn phase2_bound_is_continuous_at_switch() {
        let v = 0.19973122464953186;
        assert_eq!(phase2_bound(0.372, 0.372, 1.0, 0.9, v), v);
    }

    #[test]
    fn phase2_bound_frozen_value() {
        // All inputs 1: the final bound collapses to exactly 1/e.
        let v = phase1_bound(0.372, 1.0, 1.0);
        let h2 = phase2_bound(1.0, 0.372, 1.0, 1.0, v);
        assert!((h2 - 0.36787944117144233).abs() < 1e-15);
    }

    #[test]
    fn guarantee_rhs_frozen_values() {
        assert!((guarantee_rhs(0.372, 1.0, 0.0, 1.0) - 0.36787944117144233).abs() < 1e-15);
        // A zero switch time removes every guide-set term.
        let rhs = guarantee_rhs(0.0, 2.0, 0.7, 1.3);
        assert!((rhs - 2.0 / libm::exp(1.0)).abs() < 1e-15);
        assert!((guarantee_rhs(0.372, 1.0, 0.3, 0.9) - 0.33144950075957624).abs() < 1e-15);
    }

    #[test]
    fn recursion_first_step_is_linear() {
        let s = Schedule::with_step(0.372, 0.372).unwrap();
        let tracker = BoundTracker::compute(&s, &inputs(), 3);
        // g(delta) = delta * f(OPT \ Z) because the drive at t = 0 has no
        // union term yet.
        let delta = s.delta1();
        assert!((tracker.grid[1].1 - delta * 0.8).abs() < 1e-15);
    }

    #[test]
    fn recursion_dominates_closed_forms() {
        let s = Schedule::with_step(0.372, 1e-3).unwrap();
        let inputs = inputs();
        let tracker = BoundTracker::compute(&s, &inputs, 3);
        assert!((tracker.closed_form_switch - 0.19973122464953186).abs() < 1e-12);
        assert!((tracker.closed_form_final - 0.3480273616927311).abs() < 1e-12);
        assert!((tracker.rhs - 0.33144950075957624).abs() < 1e-12);
        for (i, &(t, g)) in tracker.grid.iter().enumerate() {
            let h = if i <= s.phase1_steps() {
                phase1_bound(t, inputs.f_opt_minus_z, inputs.f_opt_union_z)
            } else {
                phase2_bound(
                    t,
                    s.switch_time(),
                    inputs.f_opt,
                    inputs.f_opt_union_z,
                    tracker.closed_form_switch,
                )
            };
            assert!(h <= g + 1e-9, "closed form exceeds recursion at t = {t}");
        }
        assert!(tracker.switch_bound >= tracker.closed_form_switch - 1e-9);
        assert!(tracker.recursion_final >= tracker.closed_form_final - 1e-9);
        assert!(tracker.closed_form_final >= tracker.rhs - 1e-12);
    }

    #[test]
    fn guide_set_is_frozen_during_phase_one() {
        let f = triangle_cut();
        let p = Polytope::hypercube(3).unwrap();
        let z = SubsetMask::singleton(3, 0);
        let s = Schedule::with_step(0.372, 0.01).unwrap();
        let run =
            aided_mcg(&f, &p, &z, &s, WeightMode::Exact, 0, Recording::Full, None).unwrap();
        for step in &run.trajectory.steps {
            if step.t < 0.372 {
                assert_eq!(step.y.coord(0), 0.0);
                assert_eq!(step.x.coord(0), 0.0);
            }
        }
        let at_switch = &run.trajectory.steps[s.phase1_steps()];
        assert_eq!(at_switch.t, 0.372);
        assert_eq!(at_switch.y.coord(0), 0.0);
        assert!(run.output.coord(0) > 0.0);
        assert!(p.contains(&run.output));
    }

    #[test]
    fn full_guide_set_freezes_everything_until_switch() {
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 2).unwrap();
        let z = SubsetMask::full(3);
        let s = Schedule::with_step(0.372, 0.05).unwrap();
        let run =
            aided_mcg(&f, &p, &z, &s, WeightMode::Exact, 0, Recording::Full, None).unwrap();
        let at_switch = &run.trajectory.steps[s.phase1_steps()];
        assert_eq!(at_switch.y.coords(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_switch_time_ignores_guide_set() {
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 1).unwrap();
        let s = Schedule::with_step(0.0, 0.01).unwrap();
        let with_z = aided_mcg(
            &f,
            &p,
            &SubsetMask::from_indices(3, &[0, 2]).unwrap(),
            &s,
            WeightMode::Exact,
            0,
            Recording::EndpointsOnly,
            None,
        )
        .unwrap();
        let without = measured_continuous_greedy(
            &f,
            &p,
            s.phase2_steps(),
            WeightMode::Exact,
            0,
            Recording::EndpointsOnly,
        )
        .unwrap();
        assert_eq!(with_z.output.coords(), without.output.coords());
        assert_eq!(with_z.value, without.value);
    }

    #[test]
    fn exact_run_uses_one_tabulation_sweep() {
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 2).unwrap();
        let s = Schedule::with_step(0.372, 0.01).unwrap();
        let _ = aided_mcg(
            &f,
            &p,
            &SubsetMask::empty(3),
            &s,
            WeightMode::Exact,
            0,
            Recording::EndpointsOnly,
            None,
        )
        .unwrap();
        assert_eq!(f.eval_count(), 8);
    }

    #[test]
    fn final_value_meets_tracked_guarantee() {
        // Plain measured greedy on the triangle with one allowed element:
        // the guarantee collapses to f(OPT)/e and the run must clear it
        // minus the discretization allowance.
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 1).unwrap();
        let s = Schedule::with_step(0.0, 1e-3).unwrap();
        let inputs = BoundInputs {
            f_opt: 2.0,
            f_opt_minus_z: 2.0,
            f_opt_inter_z: 0.0,
            f_opt_union_z: 2.0,
            value_scale: 2.0,
        };
        let run = aided_mcg(
            &f,
            &p,
            &SubsetMask::empty(3),
            &s,
            WeightMode::Exact,
            0,
            Recording::EndpointsOnly,
            Some(&inputs),
        )
        .unwrap();
        let tracker = run.tracker.as_ref().unwrap();
        assert!((tracker.rhs - 2.0 * 0.36787944117144233).abs() < 1e-12);
        assert!(run.value >= tracker.rhs - tracker.discretization_slack);
        assert!(run.value >= tracker.recursion_final - tracker.discretization_slack);
    }

    #[test]
    fn sampled_runs_are_seed_deterministic() {
        let f = triangle_cut();
        let p = Polytope::hypercube(3).unwrap();
        let s = Schedule::with_step(0.372, 0.05).unwrap();
        let z = SubsetMask::singleton(3, 1);
        let mode = WeightMode::Sampled { samples: 32 };
        let a = aided_mcg(&f, &p, &z, &s, mode, 5, Recording::EndpointsOnly, None).unwrap();
        let b = aided_mcg(&f, &p, &z, &s, mode, 5, Recording::EndpointsOnly, None).unwrap();
        assert_eq!(a.output.coords(), b.output.coords());
        assert_eq!(a.value, b.value);
        let c = aided_mcg(&f, &p, &z, &s, mode, 6, Recording::EndpointsOnly, None).unwrap();
        assert_ne!(a.output.coords(), c.output.coords());
    }

    #[test]
    fn recording_modes_filter_steps() {
        let f = triangle_cut();
        let p = Polytope::hypercube(3).unwrap();
        let s = Schedule::with_step(0.0, 0.1).unwrap();
        let z = SubsetMask::empty(3);
        let full =
            aided_mcg(&f, &p, &z, &s, WeightMode::Exact, 0, Recording::Full, None).unwrap();
        assert_eq!(full.trajectory.steps.len(), s.total_steps());
        let thin =
            aided_mcg(&f, &p, &z, &s, WeightMode::Exact, 0, Recording::EveryKth(4), None)
                .unwrap();
        assert_eq!(thin.trajectory.steps.len(), (s.total_steps() + 3) / 4);
        let ends = aided_mcg(
            &f,
            &p,
            &z,
            &s,
            WeightMode::Exact,
            0,
            Recording::EndpointsOnly,
            None,
        )
        .unwrap();
        assert!(ends.trajectory.steps.is_empty());
        assert_eq!(ends.trajectory.final_point.coords(), full.trajectory.final_point.coords());
    }
}
