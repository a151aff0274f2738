use super::{SettingDistribution, SourceStrategy};
use crate::error::{Error, Result};
use crate::scalar::{check_distribution, Scalar};
use crate::scenario::{Behavior, ScenarioShape};

/// p(Λ) = Σ_z p(Λ|z) p_obs(z) from `posterior[z][λ]`.
pub fn lambda_marginal<T: Scalar>(posterior: &[Vec<T>], p_obs: &SettingDistribution<T>) -> Result<Vec<T>> {
    check_posterior(posterior, p_obs.shape())?;
    let width = posterior[0].len();
    let mut out = vec![T::zero(); width];
    for (row, pz) in posterior.iter().zip(p_obs.probs()) {
        for (acc, p) in out.iter_mut().zip(row) {
            *acc = acc.clone() + p.clone() * pz.clone();
        }
    }
    Ok(out)
}

fn check_posterior<T: Scalar>(posterior: &[Vec<T>], shape: &ScenarioShape) -> Result<()> {
    if posterior.len() != shape.num_settings() {
        return Err(Error::ShapeMismatch(format!(
            "{} rows of p(λ|z) for {} settings",
            posterior.len(),
            shape.num_settings()
        )));
    }
    let width = posterior.first().map_or(0, Vec::len);
    if width == 0 {
        return Err(Error::InvalidStrategy("empty λ alphabet".into()));
    }
    for (z, row) in posterior.iter().enumerate() {
        if row.len() != width {
            return Err(Error::ShapeMismatch(format!("p(λ|z={z}) has {} entries, expected {width}", row.len())));
        }
        check_distribution(row, &format!("p(λ|z={z})"))?;
    }
    Ok(())
}

/// M′ = max_z Σ_λ |p(λ|z) − p(λ)|, i.e. twice the largest total variation
/// distance between a setting's posterior and the λ marginal.
pub fn m_prime<T: Scalar>(posterior: &[Vec<T>], p_obs: &SettingDistribution<T>) -> Result<T> {
    let marginal = lambda_marginal(posterior, p_obs)?;
    Ok(posterior
        .iter()
        .map(|row| {
            row.iter()
                .zip(&marginal)
                .fold(T::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs())
        })
        .fold(T::zero(), |best, d| if d > best { d } else { best }))
}

/// Inverts Bayes: p(λ) and p(z|λ) from p(λ|z) and p_obs.
pub fn conditionals_from_posterior<T: Scalar>(
    posterior: &[Vec<T>],
    p_obs: &SettingDistribution<T>,
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let prior = lambda_marginal(posterior, p_obs)?;
    let conditionals = prior
        .iter()
        .enumerate()
        .map(|(k, w)| {
            if !w.is_positive_tol() {
                return Err(Error::InvalidDistribution(format!("λ_{k} has zero probability")));
            }
            Ok(posterior
                .iter()
                .zip(p_obs.probs())
                .map(|(row, pz)| row[k].clone() * pz.clone() / w.clone())
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((prior, conditionals))
}

/// Hidden-variable model with local stochastic responses and
/// setting-dependent λ statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalResponseModel<T> {
    shape: ScenarioShape,
    /// `responses[λ][party][setting][outcome]` = p(o | setting, λ).
    responses: Vec<Vec<Vec<Vec<T>>>>,
    /// `posterior[z][λ]` = p(λ|z).
    posterior: Vec<Vec<T>>,
}

impl<T: Scalar> LocalResponseModel<T> {
    pub fn new(shape: ScenarioShape, responses: Vec<Vec<Vec<Vec<T>>>>, posterior: Vec<Vec<T>>) -> Result<Self> {
        check_posterior(&posterior, &shape)?;
        if responses.len() != posterior[0].len() {
            return Err(Error::ShapeMismatch(format!(
                "{} response tables for {} λ values",
                responses.len(),
                posterior[0].len()
            )));
        }
        for (k, per_party) in responses.iter().enumerate() {
            if per_party.len() != shape.parties() {
                return Err(Error::ShapeMismatch(format!("λ_{k}: {} parties", per_party.len())));
            }
            for (i, per_setting) in per_party.iter().enumerate() {
                if per_setting.len() != shape.settings()[i] {
                    return Err(Error::ShapeMismatch(format!("λ_{k}, party {i}: {} settings", per_setting.len())));
                }
                for dist in per_setting {
                    if dist.len() != shape.outcomes()[i] {
                        return Err(Error::ShapeMismatch(format!("λ_{k}, party {i}: {} outcomes", dist.len())));
                    }
                    check_distribution(dist, &format!("response of party {i} under λ_{k}"))?;
                }
            }
        }
        Ok(Self { shape, responses, posterior })
    }

    /// Deterministic responses and Bayes posterior of a strategy with outputs.
    pub fn from_strategy(s: &SourceStrategy<T>) -> Result<Self> {
        let outputs = s
            .outputs()
            .ok_or_else(|| Error::MissingMetadata("strategy has no outputs".into()))?;
        let shape = s.shape().clone();
        let responses = outputs
            .iter()
            .map(|d| {
                d.assignment()
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .map(|&o| (0..shape.outcomes()[i]).map(|k| T::from_int(i64::from(k == o))).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(shape, responses, s.posterior()?)
    }

    pub fn shape(&self) -> &ScenarioShape {
        &self.shape
    }

    pub fn responses(&self) -> &[Vec<Vec<Vec<T>>>] {
        &self.responses
    }

    pub fn posterior(&self) -> &[Vec<T>] {
        &self.posterior
    }

    fn product_response(&self, lambda: usize, z: usize, o: usize) -> T {
        let zs = self.shape.setting_tuple(z);
        let os = self.shape.outcome_tuple(o);
        self.responses[lambda]
            .iter()
            .enumerate()
            .fold(T::one(), |acc, (i, per_setting)| acc * per_setting[zs[i]][os[i]].clone())
    }

    /// Behavior with p(λ|z) weights when `weights` is `None`, else with the
    /// fixed λ distribution given.
    fn behavior_with(&self, weights: Option<&[T]>) -> Result<Behavior<T>> {
        Behavior::from_fn(self.shape.clone(), |z, o| {
            let w = weights.unwrap_or(&self.posterior[z]);
            w.iter()
                .enumerate()
                .fold(T::zero(), |acc, (k, p)| acc + p.clone() * self.product_response(k, z, o))
        })
    }

    /// Observed statistics p^λ(o|z) = Σ_λ Π_i p(o_i|z_i,λ) p(λ|z).
    pub fn observed_behavior(&self) -> Result<Behavior<T>> {
        self.behavior_with(None)
    }

    /// Measurement-independent counterpart using p(λ) for every z.
    pub fn independent_behavior(&self, p_obs: &SettingDistribution<T>) -> Result<Behavior<T>> {
        let marginal = lambda_marginal(&self.posterior, p_obs)?;
        self.behavior_with(Some(&marginal))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MPrimeBound<T> {
    pub m_prime: T,
    /// max_{o,z} |p^λ(o|z) − p(o|z)|.
    pub max_deviation: T,
    pub holds: bool,
    /// m_prime − max_deviation.
    pub slack: T,
}

/// Checks |p^λ(o|z) − p(o|z)| ≤ M′ entrywise.
pub fn m_prime_bound_check<T: Scalar>(
    model: &LocalResponseModel<T>,
    p_obs: &SettingDistribution<T>,
) -> Result<MPrimeBound<T>> {
    model.shape.ensure_same(p_obs.shape())?;
    let m = m_prime(&model.posterior, p_obs)?;
    let observed = model.observed_behavior()?;
    let independent = model.independent_behavior(p_obs)?;
    let max_deviation = observed
        .table()
        .iter()
        .zip(independent.table())
        .map(|(a, b)| (a.clone() - b.clone()).abs())
        .fold(T::zero(), |best, d| if d > best { d } else { best });
    let slack = m.clone() - max_deviation.clone();
    Ok(MPrimeBound { holds: !slack.is_negative_tol(), m_prime: m, max_deviation, slack })
}
