//! Bell scenarios, behaviors, functionals and the local polytope's vertices.

mod behavior;
mod catalog;
mod functional;
mod shape;
mod strategy;

pub use behavior::{Behavior, NoSignalingReport, SignalingWitness};
pub use catalog::{catalog_chained, catalog_chsh, catalog_tilted_chsh, MerminInfo};
pub use functional::{bell_value, BellFunctional, HidingMetadata, Limits};
pub use shape::ScenarioShape;
pub use strategy::{
    enumerate_local_vertices, enumerate_local_vertices_capped, local_vertex_count,
    DeterministicStrategy, DEFAULT_VERTEX_CAP,
};

use crate::scalar::Scalar;

/// No-signaling test with a witness on failure.
pub fn is_no_signaling<T: Scalar>(p: &Behavior<T>, tol: &T) -> NoSignalingReport {
    p.no_signaling_report(tol)
}

/// Best deterministic strategy for `f` when only the settings in `visible`
/// are ever asked, with the score Σ_{z∈visible} c(o_λ(z), z). Ties resolve
/// to the first vertex in canonical order.
pub fn best_deterministic_on<T: Scalar>(
    f: &BellFunctional<T>,
    visible: &[usize],
) -> crate::Result<(DeterministicStrategy, T)> {
    let mut best: Option<(DeterministicStrategy, T)> = None;
    for v in enumerate_local_vertices(f.shape())? {
        let score = visible
            .iter()
            .fold(T::zero(), |acc, &z| acc + f.deterministic_term(z, v.outcome_at(z)));
        if best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((v, score));
        }
    }
    Ok(best.expect("at least one vertex"))
}
