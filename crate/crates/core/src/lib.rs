//! Constrained non-monotone submodular maximization.
//!
//! The crate implements the full pipeline behind the best known approximation
//! guarantee (0.385) for maximizing a non-negative submodular set function
//! subject to a down-closed solvable polytope:
//!
//! * [`set_function`]: value-oracle set functions (cut, coverage, facility
//!   location, explicit tables) with atomic evaluation counting and an
//!   exhaustive submodularity checker,
//! * [`extensions`]: exact and sampled multilinear extension values,
//!   gradients and element weights, plus the Lovász extension,
//! * [`polytope`]: down-closed feasible regions (box, cardinality, partition
//!   matroid, general matroid by independence oracle, knapsack) with exact
//!   linear maximization oracles and small-instance vertex enumeration,
//! * [`local_search`]: fractional local search driven to first-order
//!   stationarity, with the exchange-inequality certificate it implies,
//! * [`mcg`]: the measured continuous greedy ascent, optionally guided by a
//!   guide set `Z` that is avoided up to a switch time, together with the
//!   closed-form and recursive lower bounds on its output value,
//! * [`pipeline`]: the combined algorithm (local search, one random guide
//!   set, guided greedy, randomized selection) and the parameter program
//!   that yields the 0.385 constant,
//! * [`verify`]: brute-force optima and end-to-end guarantee verification
//!   for small instances,
//! * [`generate`]: seeded instance generators and the fixed verification
//!   corpus.
//!
//! Everything is deterministic given a master seed: randomness is drawn from
//! independent substreams keyed by operation, step and element (see [`rng`]),
//! so results do not depend on sampling order or thread count.
//!
//! The crate is `no_std` (requires `alloc`); IO, file formats and the CLI
//! live in the companion `submax-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod extensions;
pub mod generate;
pub mod local_search;
pub mod mcg;
pub mod pipeline;
pub mod polytope;
pub mod rng;
pub mod set_function;
pub mod verify;

pub use error::{Error, Result};
pub use extensions::{Point, SampleEstimate, WeightMode};
pub use generate::{
    generate_instance, has_positive_singleton, verification_corpus, ConstraintKind, FunctionKind,
    GeneratorConfig, InstanceSpec,
};
pub use local_search::{
    check_exchange_inequality, fractional_local_search, stationarity_gap, ExchangeCheck,
    LocalSearchConfig, LocalSearchResult,
};
pub use mcg::{
    aided_mcg, apply_update, bound_recursion, guarantee_rhs, measured_continuous_greedy,
    phase1_bound, phase2_bound, theory_sample_count, BoundInputs, BoundTracker, McgRun,
    Recording, Schedule, Trajectory, TrajectoryStep,
};
pub use pipeline::{
    guarantee_ratio, main_algorithm, optimize_parameters, params_for_switch_time, Chosen,
    MainParams, MainRun, ParamSolution, RunOptions, Selection,
};
pub use polytope::{
    normalize_ground_set, ConstraintSpec, IndependenceOracle, Normalized, Polytope, Vertex,
};
pub use set_function::{DenseTable, FunctionSpec, GroundSet, SetFunction, SubsetMask};
pub use verify::{brute_force_opt, verify_run, GuaranteeReport, Verdicts};
