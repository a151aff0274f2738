//! Explicit measurement-dependent local strategies.

use super::{LocalResponseModel, SourceStrategy};
use crate::error::{Error, Result};
use crate::fine::{cross_set, local_mimic};
use crate::scalar::Scalar;
use crate::scenario::{best_deterministic_on, Behavior, BellFunctional, DeterministicStrategy, ScenarioShape};

fn tuple_label(prefix: &str, tuple: &[usize]) -> String {
    let inner: Vec<String> = tuple.iter().map(usize::to_string).collect();
    format!("{prefix}({})", inner.join(","))
}

fn uniform_on<T: Scalar>(n: usize, support: &[usize]) -> Vec<T> {
    let w = T::from_ratio(1, support.len() as i64);
    let mut out = vec![T::zero(); n];
    for &z in support {
        out[z] = w.clone();
    }
    out
}

/// One λ per anchor tuple, each asking only the anchor's cross set,
/// uniformly; the prior is uniform over anchors.
///
/// With a functional, each λ carries the deterministic strategy that
/// scores best on its cross set. Without one, outputs are left empty.
pub fn strategy_theorem1<T: Scalar>(
    shape: &ScenarioShape,
    f: Option<&BellFunctional<T>>,
) -> Result<SourceStrategy<T>> {
    if let Some(f) = f {
        shape.ensure_same(f.shape())?;
    }
    let n = shape.num_settings();
    let mut lambdas = Vec::with_capacity(n);
    let mut conditionals = Vec::with_capacity(n);
    let mut outputs = Vec::with_capacity(n);
    for anchor in shape.setting_tuples() {
        let cross = cross_set(shape, &anchor)?;
        lambdas.push(tuple_label("anchor", &anchor));
        conditionals.push(uniform_on(n, cross.members()));
        if let Some(f) = f {
            outputs.push(best_deterministic_on(f, cross.members())?.0);
        }
    }
    SourceStrategy::new(
        shape.clone(),
        lambdas,
        vec![T::from_ratio(1, n as i64); n],
        conditionals,
        f.map(|_| outputs),
    )
}

/// Anchored strategy whose outputs come from the local mimic of a
/// no-signaling point: λ = (anchor, assignment), with the assignment drawn
/// from that anchor's joint outcome model.
pub fn strategy_theorem1_mimic<T: Scalar>(ns_point: &Behavior<T>) -> Result<SourceStrategy<T>> {
    let shape = ns_point.shape().clone();
    let n = shape.num_settings();
    let anchor_weight = T::from_ratio(1, n as i64);
    let (mut lambdas, mut prior, mut conditionals, mut outputs) = (vec![], vec![], vec![], vec![]);
    for anchor in shape.setting_tuples() {
        let cross = cross_set(&shape, &anchor)?;
        let (_, model) = local_mimic(ns_point, &anchor)?;
        let cond: Vec<T> = uniform_on(n, cross.members());
        for (k, (w, d)) in model.entries().iter().enumerate() {
            lambdas.push(format!("{}#{k}", tuple_label("anchor", &anchor)));
            prior.push(anchor_weight.clone() * w.clone());
            conditionals.push(cond.clone());
            outputs.push(d.clone());
        }
    }
    SourceStrategy::new(shape, lambdas, prior, conditionals, Some(outputs))
}

/// One λ per used setting s of `f`: s is asked with probability Q and
/// every other setting with probability `p_max`, where
/// Q = 1 − (|S| − 1)·p_max. Each λ answers with the deterministic strategy
/// that scores best on the settings other than s. Uniform prior.
pub fn strategy_general<T: Scalar>(f: &BellFunctional<T>, p_max: T) -> Result<SourceStrategy<T>> {
    let shape = f.shape().clone();
    let n = shape.num_settings();
    let hidden_weight = T::one() - T::from_usize(n - 1) * p_max.clone();
    if hidden_weight.is_negative_tol() || (hidden_weight.clone() - p_max.clone()).is_positive_tol() {
        return Err(Error::InvalidStrategy(format!(
            "hidden-setting probability {} outside [0, {}]",
            hidden_weight.display(),
            p_max.display()
        )));
    }
    let used = f.used_settings();
    let mut lambdas = Vec::with_capacity(used.len());
    let mut conditionals = Vec::with_capacity(used.len());
    let mut outputs = Vec::with_capacity(used.len());
    for &hidden in &used {
        let visible: Vec<usize> = (0..n).filter(|&z| z != hidden).collect();
        lambdas.push(tuple_label("hide", &shape.setting_tuple(hidden)));
        conditionals.push(
            (0..n)
                .map(|z| if z == hidden { hidden_weight.clone() } else { p_max.clone() })
                .collect(),
        );
        outputs.push(best_deterministic_on(f, &visible)?.0);
    }
    let k = used.len() as i64;
    SourceStrategy::new(shape, lambdas, vec![T::from_ratio(1, k); used.len()], conditionals, Some(outputs))
}

/// [`strategy_general`] at p_max = 1/(|S| − 1): each λ never asks its
/// hidden setting. The induced input distribution is uniform only when
/// every setting is used.
pub fn strategy_hide_one<T: Scalar>(f: &BellFunctional<T>) -> Result<SourceStrategy<T>> {
    let n = f.shape().num_settings();
    strategy_general(f, T::from_ratio(1, n as i64 - 1))
}

/// The four deterministic points that reach 4 + α on the tilted CHSH
/// expression, each paired with the one setting pair it never asks.
pub fn strategy_tilted_chsh<T: Scalar>() -> SourceStrategy<T> {
    let points: [([i8; 4], usize); 4] = [
        ([1, -1, -1, 1], 0),
        ([1, 1, 1, -1], 1),
        ([1, -1, 1, 1], 2),
        ([1, 1, 1, 1], 3),
    ];
    let shape = ScenarioShape::chsh();
    let third = T::from_ratio(1, 3);
    SourceStrategy::new(
        shape.clone(),
        points.iter().map(|(_, h)| tuple_label("hide", &shape.setting_tuple(*h))).collect(),
        vec![T::from_ratio(1, 4); 4],
        points
            .iter()
            .map(|(_, h)| (0..4).map(|z| if z == *h { T::zero() } else { third.clone() }).collect())
            .collect(),
        Some(points.iter().map(|(s, _)| DeterministicStrategy::from_signs(*s)).collect()),
    )
    .expect("valid tilted strategy")
}

/// Exact statistics p(o|z) = Σ_λ p(λ|z) e_λ(o|z) a strategy produces.
pub fn strategy_behavior<T: Scalar>(s: &SourceStrategy<T>) -> Result<Behavior<T>> {
    LocalResponseModel::from_strategy(s)?.observed_behavior()
}
