//! Down-closed solvable feasible regions.
//!
//! A [`Polytope`] is a down-closed subset of `[0,1]^n` supporting exact
//! linear maximization (the only access the continuous algorithms need).
//! Supported kinds: the box `[0,1]^n`, the cardinality polytope
//! `{x : sum x_u <= k}`, partition matroids, arbitrary matroids given by an
//! independence oracle (with a built-in graphic matroid), and knapsacks
//! `{x : w . x <= b}`.
//!
//! `maximize_linear` puts no mass on non-positive weights, so the returned
//! vertex is always optimal for down-closed regions and never pays for
//! negative coordinates; ties are broken toward lower element ids, which
//! makes every oracle answer deterministic.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::extensions::Point;
use crate::set_function::{SetFunction, SubsetMask};

/// Tolerance applied to each defining inequality in membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Size cap for vertex enumeration.
pub const ENUM_MAX_N: usize = 16;

/// Size cap for fractional membership tests of oracle matroids (each test
/// enumerates all subsets).
pub const MATROID_MEMBERSHIP_MAX_N: usize = 16;

/// Matroid independence oracle over subsets of the ground set.
pub trait IndependenceOracle: Send + Sync {
    fn is_independent(&self, s: &SubsetMask) -> bool;
}

impl<F> IndependenceOracle for F
where
    F: Fn(&SubsetMask) -> bool + Send + Sync,
{
    fn is_independent(&self, s: &SubsetMask) -> bool {
        self(s)
    }
}

/// Serializable constraint descriptions (everything except custom oracle
/// matroids, which exist only as runtime objects).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum ConstraintSpec {
    /// The full box `[0,1]^n`.
    Box,
    /// At most `k` elements in total.
    Cardinality { k: usize },
    /// At most `capacities[i]` elements from `blocks[i]`; the blocks must
    /// partition the ground set.
    Partition { blocks: Vec<Vec<u32>>, capacities: Vec<usize> },
    /// `weights . x <= budget` with non-negative weights.
    Knapsack { weights: Vec<f64>, budget: f64 },
    /// Graphic matroid: element `e` is the edge `edges[e]` of a multigraph
    /// on `vertices` nodes; independent sets are forests.
    GraphicMatroid { vertices: usize, edges: Vec<(u32, u32)> },
}

#[derive(Clone)]
enum Kind {
    Box,
    Cardinality(usize),
    Partition { blocks: Vec<Vec<u32>>, block_of: Vec<usize>, capacities: Vec<usize> },
    Knapsack { weights: Vec<f64>, budget: f64 },
    Matroid(Arc<dyn IndependenceOracle>),
}

impl core::fmt::Debug for Kind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Kind::Box => write!(f, "Box"),
            Kind::Cardinality(k) => write!(f, "Cardinality({k})"),
            Kind::Partition { blocks, capacities, .. } => {
                write!(f, "Partition {{ blocks: {blocks:?}, capacities: {capacities:?} }}")
            }
            Kind::Knapsack { weights, budget } => {
                write!(f, "Knapsack {{ weights: {weights:?}, budget: {budget} }}")
            }
            Kind::Matroid(_) => write!(f, "Matroid(<oracle>)"),
        }
    }
}

/// A down-closed solvable polytope over ground set `{0, ..., n-1}`.
#[derive(Debug, Clone)]
pub struct Polytope {
    n: usize,
    kind: Kind,
}

/// An extreme point of a polytope. Matroid-family vertices are 0/1;
/// knapsack vertices have at most one fractional coordinate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vertex {
    point: Point,
}

impl Vertex {
    pub fn point(&self) -> &Point {
        &self.point
    }

    pub fn into_point(self) -> Point {
        self.point
    }

    /// The vertex as a subset when all coordinates are exactly 0 or 1.
    pub fn as_mask(&self) -> Option<SubsetMask> {
        let mut m = SubsetMask::empty(self.point.len());
        for u in 0..self.point.len() {
            match self.point.coord(u) {
                c if c == 0.0 => {}
                c if c == 1.0 => m.insert(u),
                _ => return None,
            }
        }
        Some(m)
    }
}

impl Polytope {
    /// The box `[0,1]^n` (the unconstrained problem).
    pub fn hypercube(n: usize) -> Result<Self> {
        Polytope::checked(n, Kind::Box)
    }

    pub fn cardinality(n: usize, k: usize) -> Result<Self> {
        Polytope::checked(n, Kind::Cardinality(k))
    }

    pub fn partition(n: usize, blocks: Vec<Vec<u32>>, capacities: Vec<usize>) -> Result<Self> {
        if blocks.len() != capacities.len() {
            return Err(Error::DimensionMismatch { expected: blocks.len(), got: capacities.len() });
        }
        let mut block_of = vec![usize::MAX; n];
        for (i, block) in blocks.iter().enumerate() {
            for &u in block {
                let u = u as usize;
                if u >= n {
                    return Err(invalid("partition block mentions an element outside the ground set"));
                }
                if block_of[u] != usize::MAX {
                    return Err(invalid("partition blocks must be disjoint"));
                }
                block_of[u] = i;
            }
        }
        if block_of.iter().any(|&b| b == usize::MAX) {
            return Err(invalid("partition blocks must cover the ground set"));
        }
        Polytope::checked(n, Kind::Partition { blocks, block_of, capacities })
    }

    pub fn knapsack(weights: Vec<f64>, budget: f64) -> Result<Self> {
        if !budget.is_finite() || budget < 0.0 {
            return Err(invalid("knapsack budget must be finite and non-negative"));
        }
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(invalid("knapsack weights must be finite and non-negative"));
            }
        }
        let n = weights.len();
        Polytope::checked(n, Kind::Knapsack { weights, budget })
    }

    /// Matroid polytope from a custom independence oracle. The oracle must
    /// describe a matroid (downward-closed with the exchange property) and
    /// must accept the empty set.
    pub fn from_matroid(n: usize, oracle: impl IndependenceOracle + 'static) -> Result<Self> {
        Polytope::checked(n, Kind::Matroid(Arc::new(oracle)))
    }

    /// Graphic matroid over the edge list of a multigraph: independent sets
    /// are forests (loops are dependent).
    pub fn graphic_matroid(vertices: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        if vertices == 0 {
            return Err(invalid("graphic matroid needs at least one vertex"));
        }
        for &(a, b) in &edges {
            if a as usize >= vertices || b as usize >= vertices {
                return Err(invalid("graphic matroid edge endpoint out of range"));
            }
        }
        let n = edges.len();
        Polytope::checked(n, Kind::Matroid(Arc::new(GraphicOracle { vertices, edges })))
    }

    /// Builds the polytope described by `spec` over `n` elements.
    pub fn from_spec(n: usize, spec: &ConstraintSpec) -> Result<Self> {
        match spec {
            ConstraintSpec::Box => Polytope::hypercube(n),
            ConstraintSpec::Cardinality { k } => Polytope::cardinality(n, *k),
            ConstraintSpec::Partition { blocks, capacities } => {
                Polytope::partition(n, blocks.clone(), capacities.clone())
            }
            ConstraintSpec::Knapsack { weights, budget } => {
                if weights.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: weights.len() });
                }
                Polytope::knapsack(weights.clone(), *budget)
            }
            ConstraintSpec::GraphicMatroid { vertices, edges } => {
                if edges.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: edges.len() });
                }
                Polytope::graphic_matroid(*vertices, edges.clone())
            }
        }
    }

    fn checked(n: usize, kind: Kind) -> Result<Self> {
        if n == 0 {
            return Err(invalid("polytope needs at least one element"));
        }
        Ok(Polytope { n, kind })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Box => "box",
            Kind::Cardinality(_) => "cardinality",
            Kind::Partition { .. } => "partition",
            Kind::Knapsack { .. } => "knapsack",
            Kind::Matroid(_) => "matroid",
        }
    }

    /// Membership test with tolerance [`MEMBERSHIP_TOL`] on each defining
    /// inequality. The coordinate bounds hold by the [`Point`] invariant.
    ///
    /// For oracle matroids a fractional query enumerates all subsets to
    /// compare `x(S)` against the matroid rank, so it requires
    /// `n <= 16`; 0/1 points of any size are answered by the oracle.
    pub fn contains(&self, x: &Point) -> bool {
        assert_eq!(x.len(), self.n, "point has wrong dimension");
        match &self.kind {
            Kind::Box => true,
            Kind::Cardinality(k) => {
                let sum: f64 = x.coords().iter().sum();
                sum <= *k as f64 + MEMBERSHIP_TOL
            }
            Kind::Partition { blocks, capacities, .. } => {
                blocks.iter().zip(capacities).all(|(block, &cap)| {
                    let sum: f64 = block.iter().map(|&u| x.coord(u as usize)).sum();
                    sum <= cap as f64 + MEMBERSHIP_TOL
                })
            }
            Kind::Knapsack { weights, budget } => {
                let total: f64 = weights.iter().zip(x.coords()).map(|(&w, &c)| w * c).sum();
                total <= budget + MEMBERSHIP_TOL
            }
            Kind::Matroid(oracle) => {
                if let Some(mask) = integral_mask(x) {
                    return oracle.is_independent(&mask);
                }
                assert!(
                    self.n <= MATROID_MEMBERSHIP_MAX_N,
                    "fractional matroid membership is exhaustive and needs n <= {MATROID_MEMBERSHIP_MAX_N}"
                );
                let ranks = self.matroid_ranks(oracle.as_ref());
                for (m, &rank) in ranks.iter().enumerate() {
                    let sum: f64 = (0..self.n)
                        .filter(|&u| m >> u & 1 == 1)
                        .map(|u| x.coord(u))
                        .sum();
                    if sum > rank as f64 + MEMBERSHIP_TOL {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Integral membership: is the subset feasible (its indicator in the
    /// polytope)?
    pub fn contains_mask(&self, s: &SubsetMask) -> bool {
        assert_eq!(s.len(), self.n, "mask has wrong dimension");
        match &self.kind {
            Kind::Box => true,
            Kind::Cardinality(k) => s.count() <= *k,
            Kind::Partition { blocks, capacities, .. } => blocks
                .iter()
                .zip(capacities)
                .all(|(block, &cap)| block.iter().filter(|&&u| s.contains(u as usize)).count() <= cap),
            Kind::Knapsack { weights, budget } => {
                let total: f64 = s.members().map(|u| weights[u]).sum();
                total <= budget + MEMBERSHIP_TOL
            }
            Kind::Matroid(oracle) => oracle.is_independent(s),
        }
    }

    fn matroid_ranks(&self, oracle: &dyn IndependenceOracle) -> Vec<usize> {
        // rank(S) by greedy augmentation, for every subset (n <= 16).
        let size = 1usize << self.n;
        let mut ranks = vec![0usize; size];
        for m in 1..size {
            let mut basis = SubsetMask::empty(self.n);
            let mut rank = 0;
            for u in 0..self.n {
                if m >> u & 1 == 0 {
                    continue;
                }
                basis.insert(u);
                if oracle.is_independent(&basis) {
                    rank += 1;
                } else {
                    basis.remove(u);
                }
            }
            ranks[m] = rank;
        }
        ranks
    }

    /// Exact linear maximization `argmax { w . x : x in P }`.
    ///
    /// Negative and zero weights receive no mass (optimal for down-closed
    /// regions); among equal weights, lower element ids win. Matroid kinds
    /// use the greedy algorithm, the knapsack uses fractional greedy by
    /// density (so the answer may have one fractional coordinate).
    pub fn maximize_linear(&self, w: &[f64]) -> Vertex {
        assert_eq!(w.len(), self.n, "weight vector has wrong dimension");
        debug_assert!(w.iter().all(|v| v.is_finite()), "weights must be finite");
        let mut x = Point::zeros(self.n);
        let mut positives: Vec<usize> = (0..self.n).filter(|&u| w[u] > 0.0).collect();
        positives.sort_unstable_by(|&a, &b| {
            w[b].partial_cmp(&w[a]).expect("finite weights").then(a.cmp(&b))
        });
        match &self.kind {
            Kind::Box => {
                for &u in &positives {
                    x.set_coord(u, 1.0);
                }
            }
            Kind::Cardinality(k) => {
                for &u in positives.iter().take(*k) {
                    x.set_coord(u, 1.0);
                }
            }
            Kind::Partition { block_of, capacities, .. } => {
                let mut used = vec![0usize; capacities.len()];
                for &u in &positives {
                    let b = block_of[u];
                    if used[b] < capacities[b] {
                        used[b] += 1;
                        x.set_coord(u, 1.0);
                    }
                }
            }
            Kind::Matroid(oracle) => {
                let mut current = SubsetMask::empty(self.n);
                for &u in &positives {
                    current.insert(u);
                    if oracle.is_independent(&current) {
                        x.set_coord(u, 1.0);
                    } else {
                        current.remove(u);
                    }
                }
            }
            Kind::Knapsack { weights, budget } => {
                // Free items first, then by profit density; one fractional
                // coordinate fills whatever budget remains.
                positives.sort_unstable_by(|&a, &b| {
                    let da = density(w[a], weights[a]);
                    let db = density(w[b], weights[b]);
                    db.partial_cmp(&da).expect("densities are comparable").then(a.cmp(&b))
                });
                let mut remaining = *budget;
                for &u in &positives {
                    let wu = weights[u];
                    if wu == 0.0 {
                        x.set_coord(u, 1.0);
                    } else if wu <= remaining {
                        x.set_coord(u, 1.0);
                        remaining -= wu;
                    } else {
                        if remaining > 0.0 {
                            x.set_coord(u, remaining / wu);
                        }
                        remaining = 0.0;
                    }
                }
            }
        }
        Vertex { point: x }
    }

    /// Enumerates all vertices (`n <= 16`). Matroid-family vertices are the
    /// indicators of feasible sets; knapsack vertices additionally include
    /// the extreme points with exactly one fractional coordinate.
    pub fn enumerate_vertices(&self) -> Result<Vec<Vertex>> {
        if self.n > ENUM_MAX_N {
            return Err(Error::TooLarge { what: "vertex enumeration", n: self.n, limit: ENUM_MAX_N });
        }
        let size = 1usize << self.n;
        let mut out = Vec::new();
        for m in 0..size {
            let mask = SubsetMask::from_bit_index(self.n, m as u64);
            if self.contains_mask(&mask) {
                out.push(Vertex { point: Point::from_mask(&mask) });
            }
        }
        if let Kind::Knapsack { weights, budget } = &self.kind {
            for m in 0..size {
                let mask = SubsetMask::from_bit_index(self.n, m as u64);
                let base: f64 = mask.members().map(|u| weights[u]).sum();
                if base > *budget {
                    continue;
                }
                let room = budget - base;
                for u in 0..self.n {
                    if mask.contains(u) {
                        continue;
                    }
                    if room > 0.0 && room < weights[u] {
                        let mut p = Point::from_mask(&mask);
                        p.set_coord(u, room / weights[u]);
                        out.push(Vertex { point: p });
                    }
                }
            }
        }
        Ok(out)
    }
}

fn density(profit: f64, weight: f64) -> f64 {
    if weight == 0.0 {
        f64::INFINITY
    } else {
        profit / weight
    }
}

fn integral_mask(x: &Point) -> Option<SubsetMask> {
    let mut m = SubsetMask::empty(x.len());
    for u in 0..x.len() {
        let c = x.coord(u);
        if c == 1.0 {
            m.insert(u);
        } else if c != 0.0 {
            return None;
        }
    }
    Some(m)
}

struct GraphicOracle {
    vertices: usize,
    edges: Vec<(u32, u32)>,
}

impl IndependenceOracle for GraphicOracle {
    fn is_independent(&self, s: &SubsetMask) -> bool {
        // Forest test by union-find; a loop or repeated component merge
        // closes a cycle.
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn find(parent: &mut [usize], mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        for e in s.members() {
            let (a, b) = self.edges[e];
            let ra = find(&mut parent, a as usize);
            let rb = find(&mut parent, b as usize);
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }
}

/// Result of [`normalize_ground_set`].
#[derive(Debug, Clone)]
pub struct Normalized {
    pub function: SetFunction,
    pub polytope: Polytope,
    /// New element `i` is original element `kept[i]`.
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
}

/// Drops every element whose singleton is infeasible (`1_u` outside `P`),
/// returning the restricted instance, the reduced polytope, and the id
/// mapping. Such elements can never carry mass, so the optimum value is
/// unchanged. Errors if nothing survives. Applying the normalization twice
/// removes nothing further.
pub fn normalize_ground_set(f: &SetFunction, p: &Polytope) -> Result<Normalized> {
    if f.n() != p.dimension() {
        return Err(Error::DimensionMismatch { expected: f.n(), got: p.dimension() });
    }
    let n = f.n();
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for u in 0..n {
        if p.contains_mask(&SubsetMask::singleton(n, u)) {
            kept.push(u);
        } else {
            removed.push(u);
        }
    }
    if kept.is_empty() {
        return Err(invalid("no singleton is feasible; the only feasible set is empty"));
    }
    if removed.is_empty() {
        return Ok(Normalized { function: f.clone(), polytope: p.clone(), kept, removed });
    }
    let function = f.restricted(&kept)?;
    let polytope = reduce_polytope(p, &kept)?;
    Ok(Normalized { function, polytope, kept, removed })
}

fn reduce_polytope(p: &Polytope, kept: &[usize]) -> Result<Polytope> {
    let n = kept.len();
    match &p.kind {
        Kind::Box => Polytope::hypercube(n),
        Kind::Cardinality(k) => Polytope::cardinality(n, *k),
        Kind::Partition { blocks, capacities, .. } => {
            let mut new_blocks = Vec::new();
            let mut new_caps = Vec::new();
            for (block, &cap) in blocks.iter().zip(capacities) {
                let members: Vec<u32> = block
                    .iter()
                    .filter_map(|&u| kept.iter().position(|&kv| kv == u as usize))
                    .map(|i| i as u32)
                    .collect();
                if !members.is_empty() {
                    new_blocks.push(members);
                    new_caps.push(cap);
                }
            }
            Polytope::partition(n, new_blocks, new_caps)
        }
        Kind::Knapsack { weights, budget } => {
            let new_weights = kept.iter().map(|&u| weights[u]).collect();
            Polytope::knapsack(new_weights, *budget)
        }
        Kind::Matroid(oracle) => {
            let oracle = Arc::clone(oracle);
            let kept: Vec<usize> = kept.to_vec();
            let base_n = p.n;
            let lifted = move |s: &SubsetMask| -> bool {
                let mut base = SubsetMask::empty(base_n);
                for i in s.members() {
                    base.insert(kept[i]);
                }
                oracle.is_independent(&base)
            };
            Polytope::from_matroid(n, lifted)
        }
    }
}
