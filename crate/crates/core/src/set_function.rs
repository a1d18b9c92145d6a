//! Value-oracle set functions.
//!
//! A [`SetFunction`] pairs a concrete function family (graph cut, directed
//! cut, weighted coverage, facility location, explicit table, or a
//! restriction of any of these to a sub-ground-set) with an atomic counter of
//! oracle evaluations. All algorithms in the crate access function values
//! only through [`SetFunction::evaluate`] / [`SetFunction::marginal`], so
//! `eval_count` is an honest record of oracle complexity.
//!
//! Every supported family is non-negative by construction; submodularity can
//! be checked exhaustively for small ground sets with
//! [`SetFunction::check_submodular_nonneg`].

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::error::{invalid, Error, Result};

/// Largest ground set for which explicit tables (and dense tabulation of any
/// instance) are supported: `2^20` stored values.
pub const EXPLICIT_TABLE_MAX_N: usize = 20;

/// Largest ground set accepted by the exhaustive submodularity checker.
pub const SUBMOD_CHECK_MAX_N: usize = 16;

/// A ground set `{0, 1, ..., n-1}` with dense element ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("ground set must contain at least one element"));
        }
        Ok(GroundSet { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn elements(&self) -> core::ops::Range<usize> {
        0..self.n
    }
}

/// A subset of the ground set, stored as a membership vector.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubsetMask {
    bits: Vec<bool>,
}

impl SubsetMask {
    pub fn empty(n: usize) -> Self {
        SubsetMask { bits: vec![false; n] }
    }

    pub fn full(n: usize) -> Self {
        SubsetMask { bits: vec![true; n] }
    }

    pub fn singleton(n: usize, u: usize) -> Self {
        let mut m = SubsetMask::empty(n);
        m.insert(u);
        m
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut m = SubsetMask::empty(n);
        for &u in indices {
            if u >= n {
                return Err(Error::DimensionMismatch { expected: n, got: u + 1 });
            }
            m.insert(u);
        }
        Ok(m)
    }

    /// Builds the subset whose members are the set bits of `index`
    /// (bit `u` encodes element `u`).
    pub fn from_bit_index(n: usize, index: u64) -> Self {
        let bits = (0..n).map(|u| index >> u & 1 == 1).collect();
        SubsetMask { bits }
    }

    /// Encodes the subset as an integer with bit `u` set for each member.
    /// Requires `n <= 63`.
    pub fn bit_index(&self) -> u64 {
        debug_assert!(self.len() <= 63);
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (u, &b)| if b { acc | 1 << u } else { acc })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, u: usize) -> bool {
        self.bits[u]
    }

    pub fn insert(&mut self, u: usize) {
        self.bits[u] = true;
    }

    pub fn remove(&mut self, u: usize) {
        self.bits[u] = false;
    }

    pub fn clear(&mut self) {
        self.bits.fill(false);
    }

    /// Number of members.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn union(&self, other: &SubsetMask) -> SubsetMask {
        debug_assert_eq!(self.len(), other.len());
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a | b).collect();
        SubsetMask { bits }
    }

    pub fn intersection(&self, other: &SubsetMask) -> SubsetMask {
        debug_assert_eq!(self.len(), other.len());
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a & b).collect();
        SubsetMask { bits }
    }

    pub fn difference(&self, other: &SubsetMask) -> SubsetMask {
        debug_assert_eq!(self.len(), other.len());
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a & !b).collect();
        SubsetMask { bits }
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(u, &b)| if b { Some(u) } else { None })
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }
}

/// Structural description of a set function. Construction data only; the
/// runtime object is [`SetFunction`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum FunctionSpec {
    /// Undirected cut: `f(S) = sum of w(u,v) over edges with exactly one
    /// endpoint in S`. Weights must be non-negative.
    GraphCut { n: usize, edges: Vec<(u32, u32, f64)> },
    /// Directed cut: `f(S) = sum of w(u,v) over arcs with u in S, v not in S`.
    DirectedCut { n: usize, arcs: Vec<(u32, u32, f64)> },
    /// Weighted coverage: element `e` covers the universe items in
    /// `covers[e]`; `f(S)` is the total weight of items covered by `S`.
    Coverage {
        n: usize,
        universe_weights: Vec<f64>,
        covers: Vec<Vec<u32>>,
    },
    /// Facility location: `f(S) = sum over clients of max utility of an open
    /// facility in S` (0 for the empty set).
    FacilityLocation { utilities: Vec<Vec<f64>> },
    /// Explicit table of `2^n` values indexed by subset bitmask.
    ExplicitTable { n: usize, values: Vec<f64> },
    /// Restriction of `base` to the elements listed in `keep` (new element
    /// `i` is old element `keep[i]`; dropped elements are always absent).
    Restricted { base: Box<FunctionSpec>, keep: Vec<u32> },
}

impl FunctionSpec {
    /// Ground-set size of the described function.
    pub fn ground_n(&self) -> usize {
        match self {
            FunctionSpec::GraphCut { n, .. }
            | FunctionSpec::DirectedCut { n, .. }
            | FunctionSpec::Coverage { n, .. }
            | FunctionSpec::ExplicitTable { n, .. } => *n,
            FunctionSpec::FacilityLocation { utilities } => {
                utilities.first().map_or(0, Vec::len)
            }
            FunctionSpec::Restricted { keep, .. } => keep.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.ground_n();
        if n == 0 {
            return Err(invalid("ground set must contain at least one element"));
        }
        let check_weight = |w: f64, what: &str| -> Result<()> {
            if !w.is_finite() || w < 0.0 {
                Err(invalid(alloc::format!("{what} must be finite and non-negative, got {w}")))
            } else {
                Ok(())
            }
        };
        match self {
            FunctionSpec::GraphCut { edges, .. } => {
                for &(u, v, w) in edges {
                    if u as usize >= n || v as usize >= n || u == v {
                        return Err(invalid("edge endpoints must be distinct elements"));
                    }
                    check_weight(w, "edge weight")?;
                }
            }
            FunctionSpec::DirectedCut { arcs, .. } => {
                for &(u, v, w) in arcs {
                    if u as usize >= n || v as usize >= n || u == v {
                        return Err(invalid("arc endpoints must be distinct elements"));
                    }
                    check_weight(w, "arc weight")?;
                }
            }
            FunctionSpec::Coverage { universe_weights, covers, .. } => {
                if covers.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: covers.len() });
                }
                for &w in universe_weights {
                    check_weight(w, "universe weight")?;
                }
                for items in covers {
                    for &j in items {
                        if j as usize >= universe_weights.len() {
                            return Err(invalid("covered item out of universe range"));
                        }
                    }
                }
            }
            FunctionSpec::FacilityLocation { utilities } => {
                if utilities.is_empty() {
                    return Err(invalid("facility location needs at least one client"));
                }
                for row in utilities {
                    if row.len() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: row.len() });
                    }
                    for &w in row {
                        check_weight(w, "utility")?;
                    }
                }
            }
            FunctionSpec::ExplicitTable { n, values } => {
                if *n > EXPLICIT_TABLE_MAX_N {
                    return Err(Error::TooLarge {
                        what: "explicit table",
                        n: *n,
                        limit: EXPLICIT_TABLE_MAX_N,
                    });
                }
                if values.len() != 1usize << n {
                    return Err(Error::DimensionMismatch {
                        expected: 1usize << n,
                        got: values.len(),
                    });
                }
                for &v in values {
                    check_weight(v, "table value")?;
                }
            }
            FunctionSpec::Restricted { base, keep } => {
                base.validate()?;
                let base_n = base.ground_n();
                let mut seen = vec![false; base_n];
                for &u in keep {
                    let u = u as usize;
                    if u >= base_n {
                        return Err(invalid("restriction keeps an element outside the base ground set"));
                    }
                    if seen[u] {
                        return Err(invalid("restriction lists an element twice"));
                    }
                    seen[u] = true;
                }
            }
        }
        Ok(())
    }
}

/// Evaluation kernel: the spec data reorganized for fast membership-closure
/// evaluation (e.g. coverage stores the reverse incidence lists).
#[derive(Debug, Clone)]
enum Kernel {
    Cut { edges: Vec<(u32, u32, f64)> },
    DiCut { arcs: Vec<(u32, u32, f64)> },
    Coverage { weights: Vec<f64>, coverers: Vec<Vec<u32>> },
    Facility { utilities: Vec<Vec<f64>> },
    Table { values: Vec<f64> },
    Restricted { base: Box<Kernel>, base_n: usize, keep: Vec<u32> },
}

impl Kernel {
    fn build(spec: &FunctionSpec) -> Kernel {
        match spec {
            FunctionSpec::GraphCut { edges, .. } => Kernel::Cut { edges: edges.clone() },
            FunctionSpec::DirectedCut { arcs, .. } => Kernel::DiCut { arcs: arcs.clone() },
            FunctionSpec::Coverage { universe_weights, covers, .. } => {
                let mut coverers = vec![Vec::new(); universe_weights.len()];
                for (e, items) in covers.iter().enumerate() {
                    for &j in items {
                        coverers[j as usize].push(e as u32);
                    }
                }
                Kernel::Coverage { weights: universe_weights.clone(), coverers }
            }
            FunctionSpec::FacilityLocation { utilities } => {
                Kernel::Facility { utilities: utilities.clone() }
            }
            FunctionSpec::ExplicitTable { values, .. } => Kernel::Table { values: values.clone() },
            FunctionSpec::Restricted { base, keep } => Kernel::Restricted {
                base: Box::new(Kernel::build(base)),
                base_n: base.ground_n(),
                keep: keep.clone(),
            },
        }
    }

    fn eval_with(&self, member: &dyn Fn(usize) -> bool) -> f64 {
        match self {
            Kernel::Cut { edges } => edges
                .iter()
                .map(|&(u, v, w)| {
                    if member(u as usize) != member(v as usize) {
                        w
                    } else {
                        0.0
                    }
                })
                .sum(),
            Kernel::DiCut { arcs } => arcs
                .iter()
                .map(|&(u, v, w)| {
                    if member(u as usize) && !member(v as usize) {
                        w
                    } else {
                        0.0
                    }
                })
                .sum(),
            Kernel::Coverage { weights, coverers } => weights
                .iter()
                .zip(coverers)
                .map(|(&w, cov)| {
                    if cov.iter().any(|&e| member(e as usize)) {
                        w
                    } else {
                        0.0
                    }
                })
                .sum(),
            Kernel::Facility { utilities } => utilities
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(e, _)| member(e))
                        .map(|(_, &w)| w)
                        .fold(0.0, f64::max)
                })
                .sum(),
            Kernel::Table { values } => {
                let mut idx = 0usize;
                for u in 0..values.len().trailing_zeros() as usize {
                    if member(u) {
                        idx |= 1 << u;
                    }
                }
                values[idx]
            }
            Kernel::Restricted { base, base_n, keep } => {
                let lifted = |v: usize| -> bool {
                    debug_assert!(v < *base_n);
                    keep.iter().position(|&k| k as usize == v).is_some_and(|i| member(i))
                };
                base.eval_with(&lifted)
            }
        }
    }
}

/// A set function instance: spec, evaluation kernel, and oracle-call counter.
#[derive(Debug)]
pub struct SetFunction {
    spec: FunctionSpec,
    kernel: Kernel,
    n: usize,
    evals: AtomicU64,
}

impl Clone for SetFunction {
    /// Cloning starts a fresh evaluation count; the clone is an independent
    /// accounting context for the same function.
    fn clone(&self) -> Self {
        SetFunction {
            spec: self.spec.clone(),
            kernel: self.kernel.clone(),
            n: self.n,
            evals: AtomicU64::new(0),
        }
    }
}

impl SetFunction {
    pub fn new(spec: FunctionSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.ground_n();
        let kernel = Kernel::build(&spec);
        Ok(SetFunction { spec, kernel, n, evals: AtomicU64::new(0) })
    }

    pub fn graph_cut(n: usize, edges: Vec<(u32, u32, f64)>) -> Result<Self> {
        SetFunction::new(FunctionSpec::GraphCut { n, edges })
    }

    pub fn directed_cut(n: usize, arcs: Vec<(u32, u32, f64)>) -> Result<Self> {
        SetFunction::new(FunctionSpec::DirectedCut { n, arcs })
    }

    pub fn coverage(n: usize, universe_weights: Vec<f64>, covers: Vec<Vec<u32>>) -> Result<Self> {
        SetFunction::new(FunctionSpec::Coverage { n, universe_weights, covers })
    }

    pub fn facility_location(utilities: Vec<Vec<f64>>) -> Result<Self> {
        SetFunction::new(FunctionSpec::FacilityLocation { utilities })
    }

    pub fn explicit_table(n: usize, values: Vec<f64>) -> Result<Self> {
        SetFunction::new(FunctionSpec::ExplicitTable { n, values })
    }

    /// Restricts the function to `keep` (in the listed order). Evaluations of
    /// the restriction agree with the base function on subsets of `keep`,
    /// with all other elements absent.
    pub fn restricted(&self, keep: &[usize]) -> Result<SetFunction> {
        SetFunction::new(FunctionSpec::Restricted {
            base: Box::new(self.spec.clone()),
            keep: keep.iter().map(|&u| u as u32).collect(),
        })
    }

    pub fn ground_set(&self) -> GroundSet {
        GroundSet { n: self.n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    /// Oracle evaluation `f(S)`. Always finite and non-negative for the
    /// supported families; increments the evaluation counter by one.
    pub fn evaluate(&self, s: &SubsetMask) -> f64 {
        assert_eq!(s.len(), self.n, "subset mask has wrong dimension");
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.kernel.eval_with(&|u| s.contains(u))
    }

    /// Oracle evaluation by bitmask (bit `u` encodes element `u`); counted
    /// exactly like [`SetFunction::evaluate`]. Requires `n <= 63`.
    pub fn value_of_mask(&self, mask: u64) -> f64 {
        debug_assert!(self.n <= 63);
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.kernel.eval_with(&|u| mask >> u & 1 == 1)
    }

    /// Marginal value `f(u | S) = f(S + u) - f(S)`, with the convention that
    /// the marginal of an element already in `S` is 0 (no oracle calls).
    pub fn marginal(&self, u: usize, s: &SubsetMask) -> f64 {
        assert!(u < self.n);
        if s.contains(u) {
            return 0.0;
        }
        let mut with = s.clone();
        with.insert(u);
        self.evaluate(&with) - self.evaluate(s)
    }

    /// Number of oracle evaluations performed so far.
    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn reset_eval_count(&self) {
        self.evals.store(0, Ordering::Relaxed);
    }

    /// The `n` singleton values `f({u})`.
    pub fn singleton_values(&self) -> Vec<f64> {
        (0..self.n)
            .map(|u| self.evaluate(&SubsetMask::singleton(self.n, u)))
            .collect()
    }

    /// Computable surrogate for the optimum value: `n * max_u f({u})`,
    /// floored by `f(emptyset)`. Upper-bounds `f(S)` for every `S` by
    /// submodularity, so it is a safe scale for relative tolerances.
    pub fn value_scale(&self) -> f64 {
        let singles = self.singleton_values();
        let max_single = singles.iter().fold(0.0f64, |a, &b| a.max(b));
        let empty = self.evaluate(&SubsetMask::empty(self.n));
        (self.n as f64 * max_single).max(empty)
    }

    /// Dense tabulation of all `2^n` values (requires `n <= 20`). The build
    /// performs exactly `2^n` counted oracle evaluations.
    pub fn tabulate(&self) -> Result<DenseTable> {
        if self.n > EXPLICIT_TABLE_MAX_N {
            return Err(Error::TooLarge {
                what: "dense tabulation",
                n: self.n,
                limit: EXPLICIT_TABLE_MAX_N,
            });
        }
        let size = 1usize << self.n;
        let values = (0..size).map(|m| self.value_of_mask(m as u64)).collect();
        Ok(DenseTable { n: self.n, values })
    }

    /// Exhaustively checks non-negativity and submodularity (`n <= 16`).
    ///
    /// Submodularity is verified through the equivalent local condition
    /// `f(S+u) + f(S+v) >= f(S+u+v) + f(S)` for all `S` and `u != v` outside
    /// `S`; a failure is reported as the violating pair `A = S+u`, `B = S+v`
    /// of the lattice inequality `f(A) + f(B) >= f(A|B) + f(A&B)`.
    pub fn check_submodular_nonneg(&self) -> Result<SubmodularityCheck> {
        if self.n > SUBMOD_CHECK_MAX_N {
            return Err(Error::TooLarge {
                what: "submodularity check",
                n: self.n,
                limit: SUBMOD_CHECK_MAX_N,
            });
        }
        let table = self.tabulate()?;
        let f = table.values();
        for (m, &v) in f.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Ok(SubmodularityCheck {
                    holds: false,
                    violation: Some(Violation::Negative {
                        s: SubsetMask::from_bit_index(self.n, m as u64),
                    }),
                });
            }
        }
        let tol = 1e-9;
        for m in 0..f.len() {
            for u in 0..self.n {
                if m >> u & 1 == 1 {
                    continue;
                }
                for v in (u + 1)..self.n {
                    if m >> v & 1 == 1 {
                        continue;
                    }
                    let mu = m | 1 << u;
                    let mv = m | 1 << v;
                    let muv = mu | 1 << v;
                    if f[mu] + f[mv] < f[muv] + f[m] - tol {
                        return Ok(SubmodularityCheck {
                            holds: false,
                            violation: Some(Violation::Submodularity {
                                a: SubsetMask::from_bit_index(self.n, mu as u64),
                                b: SubsetMask::from_bit_index(self.n, mv as u64),
                            }),
                        });
                    }
                }
            }
        }
        Ok(SubmodularityCheck { holds: true, violation: None })
    }
}

/// Result of [`SetFunction::check_submodular_nonneg`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularityCheck {
    pub holds: bool,
    pub violation: Option<Violation>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `f(A) + f(B) < f(A|B) + f(A&B)`.
    Submodularity { a: SubsetMask, b: SubsetMask },
    /// `f(S) < 0` or non-finite.
    Negative { s: SubsetMask },
}

/// All `2^n` values of a set function, indexed by subset bitmask. Reads are
/// plain array lookups and are not counted as oracle evaluations.
#[derive(Debug, Clone)]
pub struct DenseTable {
    n: usize,
    values: Vec<f64>,
}

impl DenseTable {
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > EXPLICIT_TABLE_MAX_N {
            return Err(Error::TooLarge { what: "dense table", n, limit: EXPLICIT_TABLE_MAX_N });
        }
        if values.len() != 1usize << n {
            return Err(Error::DimensionMismatch { expected: 1usize << n, got: values.len() });
        }
        Ok(DenseTable { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, mask: usize) -> f64 {
        self.values[mask]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &b| a.max(b))
    }
}

/// Label shown in diagnostics for a mask, e.g. `{0, 3, 4}`.
pub fn format_mask(s: &SubsetMask) -> String {
    use core::fmt::Write;
    let mut out = String::from("{");
    for (i, u) in s.members().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{u}");
    }
    out.push('}');
    out
}
