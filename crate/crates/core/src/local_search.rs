//! Fractional local search over a down-closed polytope.
//!
//! Frank-Wolfe ascent on the multilinear extension: at each iteration the
//! gradient is maximized linearly over the polytope, and the point moves
//! toward the answer by an exact line search. The loop stops once the
//! stationarity gap `max_{y in P} (y - x) . grad F(x)` drops to
//! `epsilon * scale`.
//!
//! At such a point the exchange inequality
//! `F(x v y) + F(x ^ y) <= 2 F(x) + 2 epsilon * scale` holds for every
//! `y` in the polytope, because the multilinear extension of a submodular
//! function is concave along directions that do not change sign and both
//! `(x v y) - x` and `(x ^ y) - x` are such directions.
//! [`check_exchange_inequality`] verifies this directly on every vertex.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::extensions::{estimate_multilinear, estimate_partial, MultilinearEvaluator, Point, WeightMode};
use crate::polytope::{Polytope, Vertex};
use crate::rng::{self, tags};
use crate::set_function::{SetFunction, SubsetMask};

/// Default relative stationarity tolerance.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Default step size for the sampled-gradient mode.
pub const DEFAULT_STEP: f64 = 0.05;

/// Default iteration cap.
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// Line search tries `1, 1/2, 1/4, ...` down to `2^-40`.
const LINE_SEARCH_LEVELS: u32 = 40;

/// Configuration for [`fractional_local_search`].
#[derive(Debug, Clone)]
pub struct LocalSearchConfig {
    /// Stationarity tolerance relative to `scale`.
    pub epsilon: f64,
    /// Step size for sampled mode; an extra line-search candidate in exact
    /// mode.
    pub step: f64,
    pub max_iterations: usize,
    /// Exact gradients (small `n`) or sampled estimates.
    pub mode: WeightMode,
    /// Convergence scale override. Defaults to the value-scale surrogate of
    /// the function; verification passes the known optimum here.
    pub scale: Option<f64>,
    /// Starting point, which must lie in the polytope. Defaults to the
    /// origin.
    pub start: Option<Point>,
    /// Master seed for sampled mode (ignored in exact mode).
    pub seed: u64,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        LocalSearchConfig {
            epsilon: DEFAULT_EPSILON,
            step: DEFAULT_STEP,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            mode: WeightMode::Exact,
            scale: None,
            start: None,
            seed: 0,
        }
    }
}

/// Outcome of [`fractional_local_search`].
#[derive(Debug, Clone)]
pub struct LocalSearchResult {
    pub x: Point,
    /// `F(x)` (exact mode) or a sampled estimate of it.
    pub value: f64,
    /// Last observed stationarity gap.
    pub gap: f64,
    /// Ascent steps taken.
    pub iterations: usize,
    /// Whether the gap test passed before the iteration cap.
    pub converged: bool,
    /// The scale the tolerance was measured against.
    pub scale: f64,
}

/// Runs Frank-Wolfe local search and returns an approximately stationary
/// point. Exact mode requires `n <= 25`; sampled mode works at any size and
/// is deterministic in `cfg.seed`.
pub fn fractional_local_search(
    f: &SetFunction,
    p: &Polytope,
    cfg: &LocalSearchConfig,
) -> Result<LocalSearchResult> {
    validate(f, p, cfg)?;
    let start = match &cfg.start {
        Some(s) => s.clone(),
        None => Point::zeros(f.n()),
    };
    match cfg.mode {
        WeightMode::Exact => exact_search(f, p, cfg, start),
        WeightMode::Sampled { samples } => sampled_search(f, p, cfg, start, samples),
    }
}

fn validate(f: &SetFunction, p: &Polytope, cfg: &LocalSearchConfig) -> Result<()> {
    if f.n() != p.dimension() {
        return Err(crate::error::Error::DimensionMismatch { expected: f.n(), got: p.dimension() });
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
        return Err(invalid("epsilon must be positive and finite"));
    }
    if !(cfg.step > 0.0 && cfg.step <= 1.0) {
        return Err(invalid("step must lie in (0, 1]"));
    }
    if cfg.max_iterations == 0 {
        return Err(invalid("max_iterations must be at least 1"));
    }
    if let Some(scale) = cfg.scale {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("scale override must be positive and finite"));
        }
    }
    if let Some(start) = &cfg.start {
        if start.len() != f.n() {
            return Err(crate::error::Error::DimensionMismatch { expected: f.n(), got: start.len() });
        }
        if !p.contains(start) {
            return Err(invalid("start point lies outside the polytope"));
        }
    }
    if let WeightMode::Sampled { samples } = cfg.mode {
        if samples < 2 {
            return Err(invalid("sampled mode needs at least 2 samples"));
        }
    }
    Ok(())
}

fn exact_search(
    f: &SetFunction,
    p: &Polytope,
    cfg: &LocalSearchConfig,
    mut x: Point,
) -> Result<LocalSearchResult> {
    let eval = MultilinearEvaluator::new(f)?;
    let scale = cfg.scale.unwrap_or_else(|| f.value_scale());
    let threshold = cfg.epsilon * scale;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_iterations {
        let grad = eval.gradient(&x);
        let v = p.maximize_linear(&grad);
        gap = v.point().dot(&grad) - x.dot(&grad);
        if gap <= threshold {
            converged = true;
            break;
        }
        let current = eval.value(&x);
        let mut best_t = 0.0;
        let mut best_val = current;
        let mut consider = |t: f64| {
            let val = eval.value(&x.blend(v.point(), t));
            if val > best_val {
                best_val = val;
                best_t = t;
            }
        };
        let mut t = 1.0;
        for _ in 0..LINE_SEARCH_LEVELS {
            consider(t);
            t *= 0.5;
        }
        consider(cfg.step);
        if best_t == 0.0 {
            // The gap is positive but no representable step improves F:
            // numerically stuck, report the honest gap.
            break;
        }
        x = x.blend(v.point(), best_t);
        iterations += 1;
    }
    let value = eval.value(&x);
    Ok(LocalSearchResult { x, value, gap, iterations, converged, scale })
}

fn sampled_search(
    f: &SetFunction,
    p: &Polytope,
    cfg: &LocalSearchConfig,
    mut x: Point,
    samples: usize,
) -> Result<LocalSearchResult> {
    let n = f.n();
    let scale = cfg.scale.unwrap_or_else(|| f.value_scale());
    let threshold = cfg.epsilon * scale;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut grad = Vec::with_capacity(n);
    let mut errs = Vec::with_capacity(n);
    for it in 0..cfg.max_iterations {
        grad.clear();
        errs.clear();
        for u in 0..n {
            let mut stream = rng::substream(cfg.seed, tags::PARTIAL, it as u64, u as u64);
            let (mean, se) = estimate_partial(f, &x, u, samples, &mut stream);
            grad.push(mean);
            errs.push(se);
        }
        let v = p.maximize_linear(&grad);
        gap = v.point().dot(&grad) - x.dot(&grad);
        let mut var = 0.0;
        for u in 0..n {
            let d = v.point().coord(u) - x.coord(u);
            var += d * d * errs[u] * errs[u];
        }
        // Stop once the observed gap is statistically indistinguishable
        // from the tolerance.
        if gap <= threshold + 4.0 * libm::sqrt(var) {
            converged = true;
            break;
        }
        x = x.blend(v.point(), cfg.step);
        iterations += 1;
    }
    let value_samples = (samples as u64).max(16);
    let value = estimate_multilinear(f, &x, value_samples, cfg.seed)?.mean;
    Ok(LocalSearchResult { x, value, gap, iterations, converged, scale })
}

/// Exact stationarity gap `max_{y in P} (y - x) . grad F(x)` (`n <= 25`).
pub fn stationarity_gap(f: &SetFunction, p: &Polytope, x: &Point) -> Result<f64> {
    if f.n() != p.dimension() {
        return Err(crate::error::Error::DimensionMismatch { expected: f.n(), got: p.dimension() });
    }
    let grad = crate::extensions::exact_gradient(f, x)?;
    let v = p.maximize_linear(&grad);
    Ok(v.point().dot(&grad) - x.dot(&grad))
}

/// Result of [`check_exchange_inequality`].
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExchangeCheck {
    pub holds: bool,
    /// Minimum over vertices of
    /// `2 F(x) + 2 epsilon * scale - F(x v y) - F(x ^ y)`.
    pub worst_slack: f64,
    /// The violating vertex when the inequality fails.
    pub witness: Option<Vertex>,
    pub scale: f64,
    pub epsilon: f64,
}

/// Checks `F(x v y) + F(x ^ y) <= 2 F(x) + 2 epsilon * scale` on every
/// vertex `y` of the polytope (`n <= 16`). When `scale` is not supplied it
/// is the brute-force feasible optimum `max { f(S) : 1_S in P }`.
pub fn check_exchange_inequality(
    f: &SetFunction,
    p: &Polytope,
    x: &Point,
    epsilon: f64,
    scale: Option<f64>,
) -> Result<ExchangeCheck> {
    if f.n() != p.dimension() {
        return Err(crate::error::Error::DimensionMismatch { expected: f.n(), got: p.dimension() });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon must be positive and finite"));
    }
    let vertices = p.enumerate_vertices()?;
    let eval = MultilinearEvaluator::new(f)?;
    let scale = match scale {
        Some(s) => {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(invalid("scale must be non-negative and finite"));
            }
            s
        }
        None => feasible_optimum(f, p),
    };
    let fx = eval.value(x);
    let allowed = 2.0 * epsilon * scale;
    let mut worst_slack = f64::INFINITY;
    let mut worst_vertex = None;
    for y in &vertices {
        let join = x.join(y.point());
        let meet = x.meet(y.point());
        let slack = 2.0 * fx + allowed - eval.value(&join) - eval.value(&meet);
        if slack < worst_slack {
            worst_slack = slack;
            worst_vertex = Some(y.clone());
        }
    }
    let holds = worst_slack >= -1e-9 * scale.max(1.0);
    let witness = if holds { None } else { worst_vertex };
    Ok(ExchangeCheck { holds, worst_slack, witness, scale, epsilon })
}

fn feasible_optimum(f: &SetFunction, p: &Polytope) -> f64 {
    let n = f.n();
    let mut best = 0.0f64;
    for m in 0..(1u64 << n) {
        let mask = SubsetMask::from_bit_index(n, m);
        if p.contains_mask(&mask) {
            best = best.max(f.evaluate(&mask));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Polytope;
    use crate::set_function::SetFunction;
    use alloc::vec;

    fn triangle_cut() -> SetFunction {
        SetFunction::graph_cut(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn exact_search_reaches_stationarity_on_box() {
        let f = triangle_cut();
        let p = Polytope::hypercube(3).unwrap();
        let cfg = LocalSearchConfig::default();
        let r = fractional_local_search(&f, &p, &cfg).unwrap();
        assert!(r.converged);
        assert!(r.gap <= cfg.epsilon * r.scale);
        // The symmetric point (1/2, 1/2, 1/2) with F = 3/2 is the interior
        // stationary value for the triangle cut.
        assert!((r.value - 1.5).abs() < 1e-6, "value {}", r.value);
        let gap = stationarity_gap(&f, &p, &r.x).unwrap();
        assert!(gap <= cfg.epsilon * r.scale + 1e-12);
    }

    #[test]
    fn exact_search_respects_cardinality_constraint() {
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 1).unwrap();
        let r = fractional_local_search(&f, &p, &LocalSearchConfig::default()).unwrap();
        assert!(r.converged);
        assert!(p.contains(&r.x));
        // Any single vertex cuts both incident edges.
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn search_value_never_drops_below_start() {
        let f = triangle_cut();
        let p = Polytope::hypercube(3).unwrap();
        let start = Point::from_vec(vec![0.25, 0.0, 0.25]).unwrap();
        let eval = MultilinearEvaluator::new(&f).unwrap();
        let start_value = eval.value(&start);
        let cfg = LocalSearchConfig { start: Some(start), ..LocalSearchConfig::default() };
        let r = fractional_local_search(&f, &p, &cfg).unwrap();
        assert!(r.value >= start_value - 1e-12);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 1).unwrap();
        let cfg = LocalSearchConfig { start: Some(Point::ones(3)), ..LocalSearchConfig::default() };
        assert!(fractional_local_search(&f, &p, &cfg).is_err());
    }

    #[test]
    fn exchange_inequality_holds_at_local_search_output() {
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 1).unwrap();
        let r = fractional_local_search(&f, &p, &LocalSearchConfig::default()).unwrap();
        let check = check_exchange_inequality(&f, &p, &r.x, 1e-3, None).unwrap();
        assert!(check.holds, "worst slack {}", check.worst_slack);
        assert!(check.witness.is_none());
        assert_eq!(check.scale, 2.0);
    }

    #[test]
    fn exchange_inequality_fails_at_origin() {
        // At x = 0 the inequality needs f(S) <= 2 eps scale for every
        // feasible S, which the triangle cut violates immediately.
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 1).unwrap();
        let x = Point::zeros(3);
        let check = check_exchange_inequality(&f, &p, &x, 1e-3, None).unwrap();
        assert!(!check.holds);
        let witness = check.witness.expect("violating vertex");
        assert!(witness.as_mask().is_some());
    }

    #[test]
    fn sampled_search_is_deterministic_and_feasible() {
        let f = triangle_cut();
        let p = Polytope::cardinality(3, 2).unwrap();
        let cfg = LocalSearchConfig {
            mode: WeightMode::Sampled { samples: 64 },
            max_iterations: 50,
            seed: 7,
            ..LocalSearchConfig::default()
        };
        let a = fractional_local_search(&f, &p, &cfg).unwrap();
        let b = fractional_local_search(&f, &p, &cfg).unwrap();
        assert_eq!(a.x.coords(), b.x.coords());
        assert_eq!(a.value, b.value);
        assert!(p.contains(&a.x));
    }

    #[test]
    fn scale_override_tightens_convergence() {
        let f = triangle_cut();
        let p = Polytope::hypercube(3).unwrap();
        let cfg = LocalSearchConfig { scale: Some(2.0), ..LocalSearchConfig::default() };
        let r = fractional_local_search(&f, &p, &cfg).unwrap();
        assert_eq!(r.scale, 2.0);
        assert!(r.gap <= cfg.epsilon * 2.0);
    }
}
