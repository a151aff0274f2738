//! Measurement-dependent sources: figures of merit, min-entropy, the
//! source polytope, explicit faking strategies, prior reconstruction and
//! the M′ distance.

mod constructions;
mod distribution;
mod mprime;
mod polytope;
mod prior;

pub use constructions::{
    strategy_behavior, strategy_general, strategy_hide_one, strategy_theorem1, strategy_theorem1_mimic,
    strategy_tilted_chsh,
};
pub use distribution::{
    guessing_probability, min_entropy, min_entropy_unconditioned, p_max_merit, p_min_merit, sv_check,
    SettingDistribution, SourceStrategy, SvParams,
};
pub use mprime::{
    conditionals_from_posterior, lambda_marginal, m_prime, m_prime_bound_check, LocalResponseModel, MPrimeBound,
};
pub use polytope::{source_polytope_vertex_count, source_polytope_vertices};
pub use prior::{column_rank, solve_prior, PriorError, PriorSolution};
