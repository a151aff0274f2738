use serde::{Deserialize, Serialize};

use super::{Behavior, ScenarioShape};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Known values of a Bell expression: local, quantum, no-signaling and
/// algebraic maxima. Unknown limits are `None`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub local: Option<f64>,
    pub quantum: Option<f64>,
    pub no_signaling: Option<f64>,
    pub algebraic: Option<f64>,
}

impl Limits {
    /// Present limits must be ordered local ≤ quantum ≤ no-signaling ≤ algebraic.
    pub fn validate(&self) -> Result<()> {
        let chain: Vec<f64> = [self.local, self.quantum, self.no_signaling, self.algebraic]
            .into_iter()
            .flatten()
            .collect();
        if chain.windows(2).any(|w| w[0] > w[1] + 1e-12) {
            return Err(Error::InvalidArgument(format!("limits out of order: {self:?}")));
        }
        Ok(())
    }
}

/// Setting-hiding metadata used by the inequality-dependent thresholds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HidingMetadata {
    /// |S|, all joint settings.
    pub total_settings: usize,
    /// |S^B|, settings with a nonzero coefficient.
    pub used_settings: usize,
    /// |S^B_g|, settings that may stay visible while the no-signaling limit is reached.
    pub good_settings: usize,
    /// Max over λ of |S^B_h(λ)|.
    pub hidden_settings: usize,
    /// Every setting is hidden by the same number of λ, so a uniform prior
    /// reproduces a uniform input distribution.
    pub symmetric: bool,
}

/// Linear functional Σ c(o,z)·p(o|z) together with its known limits.
#[derive(Clone, Debug, PartialEq)]
pub struct BellFunctional<T> {
    name: String,
    shape: ScenarioShape,
    coefficients: Vec<T>,
    limits: Limits,
    hidden_set_size: Option<usize>,
    good_set_size: Option<usize>,
    symmetric_hiding: bool,
}

impl<T: Scalar> BellFunctional<T> {
    pub fn new(
        name: impl Into<String>,
        shape: ScenarioShape,
        coefficients: Vec<T>,
        limits: Limits,
    ) -> Result<Self> {
        if coefficients.len() != shape.table_len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients, shape needs {}",
                coefficients.len(),
                shape.table_len()
            )));
        }
        limits.validate()?;
        Ok(Self {
            name: name.into(),
            shape,
            coefficients,
            limits,
            hidden_set_size: None,
            good_set_size: None,
            symmetric_hiding: false,
        })
    }

    /// Attaches hiding metadata: at most `hidden` settings per λ must be
    /// hidden, leaving `good` visible.
    pub fn with_hiding(mut self, hidden: usize, good: usize, symmetric: bool) -> Self {
        self.hidden_set_size = Some(hidden);
        self.good_set_size = Some(good);
        self.symmetric_hiding = symmetric;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &ScenarioShape {
        &self.shape
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn coefficient(&self, setting: usize, outcome: usize) -> &T {
        &self.coefficients[self.shape.entry(setting, outcome)]
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn hidden_set_size(&self) -> Option<usize> {
        self.hidden_set_size
    }

    pub fn good_set_size(&self) -> Option<usize> {
        self.good_set_size
    }

    pub fn symmetric_hiding(&self) -> bool {
        self.symmetric_hiding
    }

    pub fn hiding_metadata(&self) -> Option<HidingMetadata> {
        Some(HidingMetadata {
            total_settings: self.shape.num_settings(),
            used_settings: self.used_settings().len(),
            good_settings: self.good_set_size?,
            hidden_settings: self.hidden_set_size?,
            symmetric: self.symmetric_hiding,
        })
    }

    /// Flat indices of settings with at least one nonzero coefficient.
    pub fn used_settings(&self) -> Vec<usize> {
        let n = self.shape.num_outcomes();
        self.coefficients
            .chunks(n)
            .enumerate()
            .filter(|(_, row)| row.iter().any(|c| !c.is_zero()))
            .map(|(z, _)| z)
            .collect()
    }

    /// Σ_o c(o,z)·p(o|z) for one setting.
    pub fn setting_term(&self, setting: usize, probs: &[T]) -> T {
        let n = self.shape.num_outcomes();
        self.coefficients[setting * n..(setting + 1) * n]
            .iter()
            .zip(probs)
            .fold(T::zero(), |acc, (c, p)| acc + c.clone() * p.clone())
    }

    /// Σ_o c(o,z) e(o|z) for a deterministic response (flat outcome index).
    pub fn deterministic_term(&self, setting: usize, outcome: usize) -> T {
        self.coefficient(setting, outcome).clone()
    }

    /// Σ_{o,z} c(o,z)·p(o|z).
    pub fn value(&self, behavior: &Behavior<T>) -> Result<T> {
        self.shape.ensure_same(behavior.shape())?;
        Ok(self
            .coefficients
            .iter()
            .zip(behavior.table())
            .fold(T::zero(), |acc, (c, p)| acc + c.clone() * p.clone()))
    }

    pub fn to_f64(&self) -> BellFunctional<f64> {
        BellFunctional {
            name: self.name.clone(),
            shape: self.shape.clone(),
            coefficients: self.coefficients.iter().map(Scalar::to_f64).collect(),
            limits: self.limits,
            hidden_set_size: self.hidden_set_size,
            good_set_size: self.good_set_size,
            symmetric_hiding: self.symmetric_hiding,
        }
    }
}

/// Σ_{o,z} c(o,z)·p(o|z).
pub fn bell_value<T: Scalar>(f: &BellFunctional<T>, p: &Behavior<T>) -> Result<T> {
    f.value(p)
}
