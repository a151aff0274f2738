//! Measurement dependence in Bell tests.
//!
//! How much correlation between a Bell test's hidden variables and its
//! setting choices is needed before a violation stops meaning anything.
//! The crate builds explicit local strategies that fake violations,
//! computes min-entropy thresholds, and solves the linear program for the
//! largest Bell value a local model reaches when no setting tuple is
//! chosen with probability above a bound P_M.
//!
//! Every numeric routine is generic over [`Scalar`]: [`Rational`] for exact
//! arithmetic, `f64` for speed.

pub mod bounds;
pub mod error;
pub mod fine;
pub mod io;
pub mod lp;
pub mod random;
pub mod scalar;
pub mod scenario;
pub mod simulator;
pub mod sources;

pub use bounds::{
    chsh_analytic_max, ns_threshold, ns_threshold_of, quantum_pm_threshold, quantum_pm_threshold_from,
    quantum_threshold, theorem1_threshold, BoundReport, Regime,
};
pub use error::{Error, Result};
pub use fine::{cross_set, local_mimic, tightness_check, CrossSet, JointOutcomeModel};
pub use lp::{
    local_membership_on_subset, max_bell, max_bell_capped, sweep_max_bell, LinearProgram, LpOutcome, LpSolution,
    LpStatus, Membership, ProductVertexBasis, ProductWeight, SweepRow, DEFAULT_BASIS_CAP,
};
pub use scalar::{format_sig, parse_rational, Rational, Scalar, F64_TOLERANCE};
pub use scenario::{
    bell_value, best_deterministic_on, catalog_chained, catalog_chsh, catalog_tilted_chsh, enumerate_local_vertices,
    enumerate_local_vertices_capped, is_no_signaling, local_vertex_count, Behavior, BellFunctional,
    DeterministicStrategy, HidingMetadata, Limits, MerminInfo, NoSignalingReport, ScenarioShape, SignalingWitness,
    DEFAULT_VERTEX_CAP,
};
pub use simulator::{
    reconstruct_behavior, simulate, simulate_streaming, simulate_with_records, ExperimentSummary, RunRecord,
    CHUNK_ROUNDS, RNG_ALGORITHM,
};
pub use sources::{
    column_rank, conditionals_from_posterior, guessing_probability, lambda_marginal, m_prime, m_prime_bound_check,
    min_entropy, min_entropy_unconditioned, p_max_merit, p_min_merit, solve_prior, source_polytope_vertex_count,
    source_polytope_vertices, strategy_behavior, strategy_general, strategy_hide_one, strategy_theorem1,
    strategy_theorem1_mimic, strategy_tilted_chsh, sv_check, LocalResponseModel, MPrimeBound, PriorError,
    PriorSolution, SettingDistribution, SourceStrategy, SvParams,
};
