//! Continuous extensions of set functions.
//!
//! For `x` in `[0,1]^n`, the random set `R(x)` contains each element `u`
//! independently with probability `x_u`. The multilinear extension is
//! `F(x) = E[f(R(x))]`; the Lovász extension is the threshold integral
//! `fhat(x) = int_0^1 f({u : x_u >= lambda}) dlambda`. For submodular `f`,
//! `F(x) >= fhat(x)` pointwise.
//!
//! Exact values, partial derivatives, batched gradients and element weights
//! `w_u(x) = F(x v 1_u) - F(x) = (1 - x_u) dF/dx_u` are computed by full
//! `2^n` sweeps (capped at `n <= 25`); sampled estimators with deterministic
//! substreams cover larger ground sets. [`MultilinearEvaluator`] tabulates
//! the function once when `n <= 20` so that repeated sweeps (local search and
//! continuous-greedy inner loops) cost array lookups instead of oracle calls.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::{substream, tags};
use crate::set_function::{DenseTable, SetFunction, SubsetMask, EXPLICIT_TABLE_MAX_N};

/// Largest ground set for which exact (exponential) extension sweeps run.
pub const EXACT_MAX_N: usize = 25;

/// Buffered probability-tensor sweeps are used up to this size; above it the
/// per-subset product is recomputed to keep memory flat.
const BUFFERED_MAX_K: usize = 20;

/// A fractional point in `[0,1]^n`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn from_vec(coords: Vec<f64>) -> Result<Self> {
        for &c in &coords {
            if !c.is_finite() || !(0.0..=1.0).contains(&c) {
                return Err(invalid(alloc::format!("coordinate {c} outside [0, 1]")));
            }
        }
        Ok(Point { coords })
    }

    pub fn zeros(n: usize) -> Self {
        Point { coords: vec![0.0; n] }
    }

    pub fn ones(n: usize) -> Self {
        Point { coords: vec![1.0; n] }
    }

    /// The 0/1 indicator vector of a subset.
    pub fn from_mask(s: &SubsetMask) -> Self {
        Point {
            coords: s.as_slice().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coord(&self, u: usize) -> f64 {
        self.coords[u]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn set_coord(&mut self, u: usize, value: f64) {
        debug_assert!(value.is_finite() && (0.0..=1.0).contains(&value));
        self.coords[u] = value;
    }

    pub fn with_coord(&self, u: usize, value: f64) -> Point {
        let mut p = self.clone();
        p.set_coord(u, value);
        p
    }

    /// Coordinatewise maximum.
    pub fn join(&self, other: &Point) -> Point {
        debug_assert_eq!(self.len(), other.len());
        let coords = self.coords.iter().zip(&other.coords).map(|(&a, &b)| a.max(b)).collect();
        Point { coords }
    }

    /// Coordinatewise minimum.
    pub fn meet(&self, other: &Point) -> Point {
        debug_assert_eq!(self.len(), other.len());
        let coords = self.coords.iter().zip(&other.coords).map(|(&a, &b)| a.min(b)).collect();
        Point { coords }
    }

    /// `x v 1_S`: coordinates in `S` forced to 1.
    pub fn join_mask(&self, s: &SubsetMask) -> Point {
        debug_assert_eq!(self.len(), s.len());
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(u, &c)| if s.contains(u) { 1.0 } else { c })
            .collect();
        Point { coords }
    }

    /// `x ^ 1_S`: coordinates outside `S` forced to 0.
    pub fn meet_mask(&self, s: &SubsetMask) -> Point {
        debug_assert_eq!(self.len(), s.len());
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(u, &c)| if s.contains(u) { c } else { 0.0 })
            .collect();
        Point { coords }
    }

    /// Convex step `self + t (toward - self)` for `t` in `[0, 1]`.
    pub fn blend(&self, toward: &Point, t: f64) -> Point {
        debug_assert_eq!(self.len(), toward.len());
        debug_assert!((0.0..=1.0).contains(&t));
        let coords = self
            .coords
            .iter()
            .zip(&toward.coords)
            // Convex combinations can overshoot the unit interval by an ulp.
            .map(|(&a, &b)| (a + t * (b - a)).clamp(0.0, 1.0))
            .collect();
        Point { coords }
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        debug_assert_eq!(self.len(), w.len());
        self.coords.iter().zip(w).map(|(&a, &b)| a * b).sum()
    }
}

/// How extension values and element weights are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "kebab-case"))]
pub enum WeightMode {
    /// Full `2^n` sweeps; exact up to floating-point rounding.
    Exact,
    /// Monte-Carlo estimates with the given per-quantity sample count.
    Sampled { samples: usize },
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleEstimate {
    pub mean: f64,
    /// Sample standard deviation divided by `sqrt(sample_count)`.
    pub std_error: f64,
    pub sample_count: u64,
    pub seed: u64,
}

/// Draws `R(x)` into `out`, consuming exactly `n` uniform draws from `rng`
/// in element order.
pub fn sample_subset_into(x: &Point, rng: &mut impl Rng, out: &mut SubsetMask) {
    debug_assert_eq!(x.len(), out.len());
    for u in 0..x.len() {
        let hit = rng.random::<f64>() < x.coord(u);
        if hit {
            out.insert(u);
        } else {
            out.remove(u);
        }
    }
}

/// Draws a fresh random subset `R(x)`.
pub fn sample_random_subset(x: &Point, rng: &mut impl Rng) -> SubsetMask {
    let mut out = SubsetMask::empty(x.len());
    sample_subset_into(x, rng, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Exact sweeps.
// ---------------------------------------------------------------------------

/// Source of `f` values addressed by bitmask, behind either a dense table or
/// the live oracle.
enum MaskSource<'a> {
    Table(&'a DenseTable),
    Oracle(&'a SetFunction),
}

impl MaskSource<'_> {
    #[inline]
    fn get(&self, mask: usize) -> f64 {
        match self {
            MaskSource::Table(t) => t.value(mask),
            MaskSource::Oracle(f) => f.value_of_mask(mask as u64),
        }
    }
}

/// Fills `buf` with the `2^k` subset probabilities of the coordinates of `x`
/// excluding `skip`, where bit `j` of the buffer index stands for the j-th
/// retained coordinate.
fn fill_probabilities(x: &[f64], skip: Option<usize>, buf: &mut Vec<f64>) {
    let k = x.len() - usize::from(skip.is_some());
    buf.clear();
    buf.resize(1usize << k, 0.0);
    buf[0] = 1.0;
    let mut j = 0;
    for (u, &xu) in x.iter().enumerate() {
        if skip == Some(u) {
            continue;
        }
        let bit = 1usize << j;
        for m in 0..bit {
            let p = buf[m];
            buf[m] = p * (1.0 - xu);
            buf[m | bit] = p * xu;
        }
        j += 1;
    }
}

/// Probability of the subset encoded by `m` over the coordinates of `x`
/// excluding `skip` (same indexing as [`fill_probabilities`]).
fn subset_probability(x: &[f64], skip: Option<usize>, m: usize) -> f64 {
    let mut p = 1.0;
    let mut j = 0;
    for (u, &xu) in x.iter().enumerate() {
        if skip == Some(u) {
            continue;
        }
        p *= if m >> j & 1 == 1 { xu } else { 1.0 - xu };
        j += 1;
    }
    p
}

/// Re-inserts a cleared bit position: maps a mask over `n - 1` coordinates to
/// the full-space mask with bit `u` vacant.
#[inline]
fn expand_mask(m: usize, u: usize) -> usize {
    let low = m & ((1usize << u) - 1);
    let high = m >> u;
    (high << (u + 1)) | low
}

fn sweep_value(source: &MaskSource<'_>, x: &[f64]) -> f64 {
    let n = x.len();
    let size = 1usize << n;
    let mut acc = 0.0;
    if n <= BUFFERED_MAX_K {
        let mut buf = Vec::new();
        fill_probabilities(x, None, &mut buf);
        for (m, &p) in buf.iter().enumerate() {
            if p != 0.0 {
                acc += p * source.get(m);
            }
        }
    } else {
        for m in 0..size {
            let p = subset_probability(x, None, m);
            if p != 0.0 {
                acc += p * source.get(m);
            }
        }
    }
    acc
}

fn sweep_partial(source: &MaskSource<'_>, x: &[f64], u: usize, buf: &mut Vec<f64>) -> f64 {
    let n = x.len();
    let size = 1usize << (n - 1);
    let mut acc = 0.0;
    if n - 1 <= BUFFERED_MAX_K {
        fill_probabilities(x, Some(u), buf);
        for (m, &q) in buf.iter().enumerate() {
            if q != 0.0 {
                let full = expand_mask(m, u);
                acc += q * (source.get(full | 1 << u) - source.get(full));
            }
        }
    } else {
        for m in 0..size {
            let q = subset_probability(x, Some(u), m);
            if q != 0.0 {
                let full = expand_mask(m, u);
                acc += q * (source.get(full | 1 << u) - source.get(full));
            }
        }
    }
    acc
}

fn sweep_gradient(source: &MaskSource<'_>, x: &[f64]) -> Vec<f64> {
    let mut buf = Vec::new();
    (0..x.len()).map(|u| sweep_partial(source, x, u, &mut buf)).collect()
}

fn check_exact_size(f: &SetFunction) -> Result<()> {
    if f.n() > EXACT_MAX_N {
        Err(Error::TooLarge { what: "exact extension sweep", n: f.n(), limit: EXACT_MAX_N })
    } else {
        Ok(())
    }
}

fn check_dims(f: &SetFunction, x: &Point) -> Result<()> {
    if f.n() != x.len() {
        Err(Error::DimensionMismatch { expected: f.n(), got: x.len() })
    } else {
        Ok(())
    }
}

/// Exact multilinear extension value `F(x)` by full enumeration
/// (`n <= 25`; `2^n` oracle evaluations).
pub fn exact_multilinear(f: &SetFunction, x: &Point) -> Result<f64> {
    check_dims(f, x)?;
    check_exact_size(f)?;
    Ok(sweep_value(&MaskSource::Oracle(f), x.coords()))
}

/// Exact partial derivative `dF/dx_u(x) = F(x; x_u=1) - F(x; x_u=0)`
/// (`n <= 25`; `2^n` oracle evaluations).
pub fn partial_derivative_exact(f: &SetFunction, x: &Point, u: usize) -> Result<f64> {
    check_dims(f, x)?;
    check_exact_size(f)?;
    if u >= f.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), got: u + 1 });
    }
    let mut buf = Vec::new();
    Ok(sweep_partial(&MaskSource::Oracle(f), x.coords(), u, &mut buf))
}

/// Exact gradient of `F` at `x`, batched over all coordinates (`n <= 25`).
/// Tabulates the function first when `n <= 20` so the oracle is consulted
/// exactly `2^n` times.
pub fn exact_gradient(f: &SetFunction, x: &Point) -> Result<Vec<f64>> {
    check_dims(f, x)?;
    check_exact_size(f)?;
    if f.n() <= EXPLICIT_TABLE_MAX_N {
        let table = f.tabulate()?;
        Ok(sweep_gradient(&MaskSource::Table(&table), x.coords()))
    } else {
        Ok(sweep_gradient(&MaskSource::Oracle(f), x.coords()))
    }
}

/// Exact element weights `w_u(x) = F(x v 1_u) - F(x) = (1 - x_u) dF/dx_u`.
pub fn exact_weights(f: &SetFunction, x: &Point) -> Result<Vec<f64>> {
    let grad = exact_gradient(f, x)?;
    Ok(weights_from_gradient(x, &grad))
}

pub(crate) fn weights_from_gradient(x: &Point, grad: &[f64]) -> Vec<f64> {
    grad.iter()
        .enumerate()
        .map(|(u, &g)| (1.0 - x.coord(u)) * g)
        .collect()
}

/// Reusable exact-extension engine. Construction tabulates the function when
/// `n <= 20` (costing `2^n` oracle evaluations once); afterwards values,
/// gradients and weights are pure arithmetic.
pub struct MultilinearEvaluator<'a> {
    f: &'a SetFunction,
    table: Option<DenseTable>,
}

impl<'a> MultilinearEvaluator<'a> {
    pub fn new(f: &'a SetFunction) -> Result<Self> {
        check_exact_size(f)?;
        let table = if f.n() <= EXPLICIT_TABLE_MAX_N { Some(f.tabulate()?) } else { None };
        Ok(MultilinearEvaluator { f, table })
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    fn source(&self) -> MaskSource<'_> {
        match &self.table {
            Some(t) => MaskSource::Table(t),
            None => MaskSource::Oracle(self.f),
        }
    }

    /// Largest tabulated value `max_S f(S)` (falls back to the singleton
    /// surrogate when the function is too large to tabulate).
    pub fn max_value(&self) -> f64 {
        match &self.table {
            Some(t) => t.max_value(),
            None => self.f.value_scale(),
        }
    }

    pub fn value(&self, x: &Point) -> f64 {
        debug_assert_eq!(x.len(), self.n());
        sweep_value(&self.source(), x.coords())
    }

    pub fn gradient(&self, x: &Point) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n());
        sweep_gradient(&self.source(), x.coords())
    }

    pub fn weights(&self, x: &Point) -> Vec<f64> {
        let grad = self.gradient(x);
        weights_from_gradient(x, &grad)
    }
}

// ---------------------------------------------------------------------------
// Sampled estimators.
// ---------------------------------------------------------------------------

/// Monte-Carlo estimate of `F(x)` from `sample_count >= 2` draws of `R(x)`.
///
/// The estimator is unbiased; samples are drawn sequentially from the
/// substream keyed by `seed`, and the mean and standard error are accumulated
/// with Welford's recurrence, so the result is bit-reproducible for a given
/// `(seed, x, sample_count)`.
pub fn estimate_multilinear(
    f: &SetFunction,
    x: &Point,
    sample_count: u64,
    seed: u64,
) -> Result<SampleEstimate> {
    check_dims(f, x)?;
    if sample_count < 2 {
        return Err(invalid("estimate_multilinear needs at least 2 samples"));
    }
    let mut rng = substream(seed, tags::F_ESTIMATE, 0, 0);
    let mut mask = SubsetMask::empty(f.n());
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 1..=sample_count {
        sample_subset_into(x, &mut rng, &mut mask);
        let v = f.evaluate(&mask);
        let d = v - mean;
        mean += d / i as f64;
        m2 += d * (v - mean);
    }
    let variance = (m2 / (sample_count - 1) as f64).max(0.0);
    let std_error = libm::sqrt(variance / sample_count as f64);
    Ok(SampleEstimate { mean, std_error, sample_count, seed })
}

/// Monte-Carlo estimate of the element weight `w_u(x) = E[f(u | R(x))]`,
/// with the marginal convention that a sample already containing `u`
/// contributes 0. Unbiased for `F(x v 1_u) - F(x)`.
pub fn estimate_weight(
    f: &SetFunction,
    x: &Point,
    u: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> f64 {
    assert!(u < f.n());
    assert!(samples > 0);
    let mut mask = SubsetMask::empty(f.n());
    let mut acc = 0.0;
    for _ in 0..samples {
        sample_subset_into(x, rng, &mut mask);
        acc += f.marginal(u, &mask);
    }
    acc / samples as f64
}

/// Monte-Carlo estimate of `dF/dx_u(x)`: like [`estimate_weight`] but with
/// `u` forced out of every sample, which removes the `(1 - x_u)` damping.
/// Returns `(mean, std_error)`.
pub fn estimate_partial(
    f: &SetFunction,
    x: &Point,
    u: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> (f64, f64) {
    assert!(u < f.n());
    assert!(samples > 1);
    let mut mask = SubsetMask::empty(f.n());
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 1..=samples {
        sample_subset_into(x, rng, &mut mask);
        mask.remove(u);
        let v = f.marginal(u, &mask);
        let d = v - mean;
        mean += d / i as f64;
        m2 += d * (v - mean);
    }
    let variance = (m2 / (samples - 1) as f64).max(0.0);
    (mean, libm::sqrt(variance / samples as f64))
}

// ---------------------------------------------------------------------------
// Lovász extension.
// ---------------------------------------------------------------------------

/// Exact Lovász extension value: the threshold integral evaluated piecewise
/// over the distinct coordinates of `x` (at most `n + 1` oracle calls, any
/// ground-set size). Threshold sets use the closed convention
/// `T_lambda = {u : x_u >= lambda}`.
pub fn lovasz_value(f: &SetFunction, x: &Point) -> Result<f64> {
    check_dims(f, x)?;
    let n = f.n();
    let mut vals: Vec<f64> = x.coords().to_vec();
    vals.sort_unstable_by(|a, b| a.partial_cmp(b).expect("coordinates are finite"));
    vals.dedup();
    let mut total = 0.0;
    let mut prev = 0.0;
    let mut mask = SubsetMask::empty(n);
    for &v in &vals {
        if v <= prev {
            continue;
        }
        mask.clear();
        for u in 0..n {
            if x.coord(u) >= v {
                mask.insert(u);
            }
        }
        total += (v - prev) * f.evaluate(&mask);
        prev = v;
    }
    if prev < 1.0 {
        mask.clear();
        total += (1.0 - prev) * f.evaluate(&mask);
    }
    Ok(total)
}
