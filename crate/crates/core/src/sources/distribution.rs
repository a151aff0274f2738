use crate::error::{Error, Result};
use crate::scalar::{check_distribution, Scalar};
use crate::scenario::{DeterministicStrategy, ScenarioShape};

/// Observed distribution p_obs(z) over joint settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SettingDistribution<T> {
    shape: ScenarioShape,
    probs: Vec<T>,
}

impl<T: Scalar> SettingDistribution<T> {
    pub fn new(shape: ScenarioShape, probs: Vec<T>) -> Result<Self> {
        if probs.len() != shape.num_settings() {
            return Err(Error::ShapeMismatch(format!(
                "{} probabilities for {} joint settings",
                probs.len(),
                shape.num_settings()
            )));
        }
        check_distribution(&probs, "p_obs")?;
        Ok(Self { shape, probs })
    }

    pub fn uniform(shape: ScenarioShape) -> Self {
        let n = shape.num_settings();
        Self { shape, probs: vec![T::from_ratio(1, n as i64); n] }
    }

    pub fn shape(&self) -> &ScenarioShape {
        &self.shape
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn max(&self) -> T {
        max_of(&self.probs)
    }

    /// q = Σ_z 1/p_obs(z); `None` if some entry vanishes.
    pub fn inverse_sum(&self) -> Option<T> {
        self.probs.iter().try_fold(T::zero(), |acc, p| {
            p.is_positive_tol().then(|| acc + T::one() / p.clone())
        })
    }

    pub fn to_f64(&self) -> SettingDistribution<f64> {
        SettingDistribution {
            shape: self.shape.clone(),
            probs: self.probs.iter().map(Scalar::to_f64).collect(),
        }
    }
}

pub(crate) fn max_of<T: Scalar>(xs: &[T]) -> T {
    xs.iter()
        .cloned()
        .fold(None, |acc: Option<T>, x| match acc {
            Some(a) if a >= x => Some(a),
            _ => Some(x),
        })
        .unwrap_or_else(T::zero)
}

pub(crate) fn min_of<T: Scalar>(xs: &[T]) -> T {
    xs.iter()
        .cloned()
        .fold(None, |acc: Option<T>, x| match acc {
            Some(a) if a <= x => Some(a),
            _ => Some(x),
        })
        .unwrap_or_else(T::zero)
}

/// Finite hidden-variable model: prior p(λ), input distribution p(z|λ) per
/// λ, and optionally the deterministic local response attached to each λ.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceStrategy<T> {
    shape: ScenarioShape,
    lambdas: Vec<String>,
    prior: Vec<T>,
    conditionals: Vec<Vec<T>>,
    outputs: Option<Vec<DeterministicStrategy>>,
}

impl<T: Scalar> SourceStrategy<T> {
    pub fn new(
        shape: ScenarioShape,
        lambdas: Vec<String>,
        prior: Vec<T>,
        conditionals: Vec<Vec<T>>,
        outputs: Option<Vec<DeterministicStrategy>>,
    ) -> Result<Self> {
        let n = lambdas.len();
        if prior.len() != n || conditionals.len() != n {
            return Err(Error::InvalidStrategy(format!(
                "{n} labels, {} prior entries, {} conditionals",
                prior.len(),
                conditionals.len()
            )));
        }
        check_distribution(&prior, "p(λ)")?;
        for (label, c) in lambdas.iter().zip(&conditionals) {
            if c.len() != shape.num_settings() {
                return Err(Error::ShapeMismatch(format!(
                    "p(z|{label}) has {} entries for {} settings",
                    c.len(),
                    shape.num_settings()
                )));
            }
            check_distribution(c, &format!("p(z|{label})"))?;
        }
        if let Some(outputs) = &outputs {
            if outputs.len() != n {
                return Err(Error::InvalidStrategy(format!("{} outputs for {n} labels", outputs.len())));
            }
            for o in outputs {
                shape.ensure_same(o.shape())?;
            }
        }
        Ok(Self { shape, lambdas, prior, conditionals, outputs })
    }

    pub fn shape(&self) -> &ScenarioShape {
        &self.shape
    }

    pub fn lambdas(&self) -> &[String] {
        &self.lambdas
    }

    pub fn prior(&self) -> &[T] {
        &self.prior
    }

    /// `conditionals()[λ][z]` = p(z|λ).
    pub fn conditionals(&self) -> &[Vec<T>] {
        &self.conditionals
    }

    pub fn outputs(&self) -> Option<&[DeterministicStrategy]> {
        self.outputs.as_deref()
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// p_obs(z) = Σ_λ p(z|λ) p(λ).
    pub fn induced_p_obs(&self) -> SettingDistribution<T> {
        let mut probs = vec![T::zero(); self.shape.num_settings()];
        for (w, c) in self.prior.iter().zip(&self.conditionals) {
            for (acc, p) in probs.iter_mut().zip(c) {
                *acc = acc.clone() + w.clone() * p.clone();
            }
        }
        SettingDistribution { shape: self.shape.clone(), probs }
    }

    /// Same conditionals and outputs with a new prior.
    pub fn with_prior(&self, prior: Vec<T>) -> Result<Self> {
        Self::new(
            self.shape.clone(),
            self.lambdas.clone(),
            prior,
            self.conditionals.clone(),
            self.outputs.clone(),
        )
    }

    /// Drops λ with zero prior weight.
    pub fn pruned(&self) -> Self {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| !self.prior[k].is_zero()).collect();
        Self {
            shape: self.shape.clone(),
            lambdas: keep.iter().map(|&k| self.lambdas[k].clone()).collect(),
            prior: keep.iter().map(|&k| self.prior[k].clone()).collect(),
            conditionals: keep.iter().map(|&k| self.conditionals[k].clone()).collect(),
            outputs: self.outputs.as_ref().map(|o| keep.iter().map(|&k| o[k].clone()).collect()),
        }
    }

    pub fn to_f64(&self) -> SourceStrategy<f64> {
        SourceStrategy {
            shape: self.shape.clone(),
            lambdas: self.lambdas.clone(),
            prior: self.prior.iter().map(Scalar::to_f64).collect(),
            conditionals: self
                .conditionals
                .iter()
                .map(|c| c.iter().map(Scalar::to_f64).collect())
                .collect(),
            outputs: self.outputs.clone(),
        }
    }

    /// Bayes inversion p(λ|z) = p(z|λ)p(λ)/p_obs(z); `result[z][λ]`.
    pub fn posterior(&self) -> Result<Vec<Vec<T>>> {
        let p_obs = self.induced_p_obs();
        (0..self.shape.num_settings())
            .map(|z| {
                let pz = p_obs.probs[z].clone();
                if !pz.is_positive_tol() {
                    return Err(Error::InvalidDistribution(format!(
                        "setting {:?} has zero probability",
                        self.shape.setting_tuple(z)
                    )));
                }
                Ok(self
                    .prior
                    .iter()
                    .zip(&self.conditionals)
                    .map(|(w, c)| c[z].clone() * w.clone() / pz.clone())
                    .collect())
            })
            .collect()
    }
}

/// P_M = max_{z,λ} p(z|λ).
pub fn p_max_merit<T: Scalar>(s: &SourceStrategy<T>) -> T {
    max_of(&s.conditionals.iter().map(|c| max_of(c)).collect::<Vec<_>>())
}

/// P_m = min_{z,λ} p(z|λ).
pub fn p_min_merit<T: Scalar>(s: &SourceStrategy<T>) -> T {
    min_of(&s.conditionals.iter().map(|c| min_of(c)).collect::<Vec<_>>())
}

/// Guessing probability Σ_λ p(λ) max_z p(z|λ).
pub fn guessing_probability<T: Scalar>(s: &SourceStrategy<T>) -> T {
    s.prior
        .iter()
        .zip(&s.conditionals)
        .fold(T::zero(), |acc, (w, c)| acc + w.clone() * max_of(c))
}

/// H_min(Z|Λ) in bits.
pub fn min_entropy<T: Scalar>(s: &SourceStrategy<T>) -> f64 {
    -guessing_probability(s).to_f64().log2()
}

/// H_min(Z) = −log₂ max_z p_obs(z), in bits.
pub fn min_entropy_unconditioned<T: Scalar>(s: &SourceStrategy<T>) -> f64 {
    -s.induced_p_obs().max().to_f64().log2()
}

/// Per-symbol Santha–Vazirani bounds on the joint setting alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct SvParams<T> {
    pub p_min: T,
    pub p_max: T,
}

impl<T: Scalar> SvParams<T> {
    /// Requires 0 ≤ p_min ≤ 1/d ≤ p_max ≤ 1 for alphabet size `d`.
    pub fn new(p_min: T, p_max: T, alphabet: usize) -> Result<Self> {
        let inv = T::from_ratio(1, alphabet as i64);
        if p_min < T::zero() || p_min > inv || p_max < inv || p_max > T::one() {
            return Err(Error::OutOfRange(format!(
                "need 0 ≤ p_min ≤ 1/{alphabet} ≤ p_max ≤ 1, got ({}, {})",
                p_min.display(),
                p_max.display()
            )));
        }
        Ok(Self { p_min, p_max })
    }

    /// Binary-alphabet form p_min = δ, p_max = 1 − δ.
    pub fn from_delta(delta: T) -> Result<Self> {
        Self::new(delta.clone(), T::one() - delta, 2)
    }
}

/// Whether every p(z|λ) lies in [p_min, p_max].
pub fn sv_check<T: Scalar>(s: &SourceStrategy<T>, params: &SvParams<T>) -> bool {
    s.conditionals.iter().flatten().all(|p| {
        !(params.p_min.clone() - p.clone()).is_positive_tol()
            && !(p.clone() - params.p_max.clone()).is_positive_tol()
    })
}
