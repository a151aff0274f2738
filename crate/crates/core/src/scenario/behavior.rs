use serde::{Deserialize, Serialize};

use super::ScenarioShape;
use crate::error::{Error, Result};
use crate::scalar::{check_distribution, Scalar};

/// Conditional outcome distribution p(o|z) over a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior<T> {
    shape: ScenarioShape,
    table: Vec<T>,
}

impl<T: Scalar> Behavior<T> {
    /// Validates normalization and non-negativity of every p(·|z).
    pub fn new(shape: ScenarioShape, table: Vec<T>) -> Result<Self> {
        if table.len() != shape.table_len() {
            return Err(Error::ShapeMismatch(format!(
                "table has {} entries, shape needs {}",
                table.len(),
                shape.table_len()
            )));
        }
        let outcomes = shape.num_outcomes();
        for (z, row) in table.chunks(outcomes).enumerate() {
            check_distribution(row, &format!("p(.|z={:?})", shape.setting_tuple(z)))?;
        }
        Ok(Self { shape, table })
    }

    /// Builds a table from `f(z, o)` over flat setting and outcome indices.
    pub fn from_fn(shape: ScenarioShape, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let outcomes = shape.num_outcomes();
        let table = (0..shape.table_len()).map(|i| f(i / outcomes, i % outcomes)).collect();
        Self::new(shape, table)
    }

    /// p(o|z) = 1/|O| everywhere.
    pub fn uniform(shape: ScenarioShape) -> Self {
        let weight = T::from_ratio(1, shape.num_outcomes() as i64);
        let table = vec![weight; shape.table_len()];
        Self { shape, table }
    }

    /// Popescu–Rohrlich box in a two-setting binary bipartite scenario:
    /// a ⊕ b = x·y, uniform marginals.
    pub fn pr_box() -> Self {
        Self::pr_box_variant(false, false, false)
    }

    /// PR box relabeled so that a ⊕ b = x·y ⊕ αx ⊕ βy ⊕ γ.
    pub fn pr_box_variant(alpha: bool, beta: bool, gamma: bool) -> Self {
        let shape = ScenarioShape::chsh();
        let half = T::from_ratio(1, 2);
        Self::from_fn(shape.clone(), |z, o| {
            let (x, y) = (z / 2, z % 2);
            let (a, b) = (o / 2, o % 2);
            let target = (x & y) ^ (alpha as usize & x) ^ (beta as usize & y) ^ gamma as usize;
            if a ^ b == target {
                half.clone()
            } else {
                T::zero()
            }
        })
        .expect("PR box is normalized")
    }

    pub fn shape(&self) -> &ScenarioShape {
        &self.shape
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn prob(&self, setting: usize, outcome: usize) -> &T {
        &self.table[self.shape.entry(setting, outcome)]
    }

    /// p(·|z) for the flat setting index `z`.
    pub fn row(&self, setting: usize) -> &[T] {
        let n = self.shape.num_outcomes();
        &self.table[setting * n..(setting + 1) * n]
    }

    /// μ·self + (1−μ)·other.
    pub fn mix(&self, other: &Self, weight: &T) -> Result<Self> {
        self.shape.ensure_same(&other.shape)?;
        let rest = T::one() - weight.clone();
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(p, q)| weight.clone() * p.clone() + rest.clone() * q.clone())
            .collect();
        Self::new(self.shape.clone(), table)
    }

    /// Convex combination Σ w_k p_k; weights must form a distribution.
    pub fn mixture(parts: &[(T, Behavior<T>)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let shape = first.1.shape.clone();
        let mut table = vec![T::zero(); shape.table_len()];
        for (w, b) in parts {
            shape.ensure_same(&b.shape)?;
            for (acc, p) in table.iter_mut().zip(&b.table) {
                *acc = acc.clone() + w.clone() * p.clone();
            }
        }
        Self::new(shape, table)
    }

    pub fn to_f64(&self) -> Behavior<f64> {
        Behavior {
            shape: self.shape.clone(),
            table: self.table.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// Marginal of every party except `party`, at joint setting `z`,
    /// indexed by the outcome of the remaining parties in row-major order.
    pub(crate) fn marginal_without(&self, party: usize, setting: usize) -> Vec<T> {
        let d = self.shape.outcomes()[party];
        let reduced_len = self.shape.num_outcomes() / d;
        let mut out = vec![T::zero(); reduced_len];
        for (o, p) in self.row(setting).iter().enumerate() {
            let tuple = self.shape.outcome_tuple(o);
            let key = reduced_index(&tuple, self.shape.outcomes(), party);
            out[key] = out[key].clone() + p.clone();
        }
        out
    }

    /// No-signaling test: for every party i, the joint marginal of the other
    /// parties must not depend on i's setting. Compares every joint setting
    /// against the one with z_i = 0.
    pub fn no_signaling_report(&self, tol: &T) -> NoSignalingReport {
        let mut worst: Option<SignalingWitness> = None;
        for party in 0..self.shape.parties() {
            for z in 0..self.shape.num_settings() {
                let tuple = self.shape.setting_tuple(z);
                if tuple[party] == 0 {
                    continue;
                }
                let mut base_tuple = tuple.clone();
                base_tuple[party] = 0;
                let base = self.shape.setting_index(&base_tuple).expect("valid tuple");
                let lhs = self.marginal_without(party, base);
                let rhs = self.marginal_without(party, z);
                for (k, (p, q)) in lhs.iter().zip(&rhs).enumerate() {
                    let diff = (p.clone() - q.clone()).abs();
                    if diff > *tol {
                        let diff = diff.to_f64();
                        if worst.as_ref().is_none_or(|w| diff > w.difference) {
                            worst = Some(SignalingWitness {
                                party,
                                settings: (base_tuple.clone(), tuple.clone()),
                                others_outcome: unreduced_tuple(k, self.shape.outcomes(), party),
                                difference: diff,
                            });
                        }
                    }
                }
            }
        }
        NoSignalingReport { witness: worst }
    }

    pub fn is_no_signaling(&self, tol: &T) -> bool {
        self.no_signaling_report(tol).is_no_signaling()
    }
}

/// Outcome of [`Behavior::no_signaling_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoSignalingReport {
    /// Largest violation found, if any.
    pub witness: Option<SignalingWitness>,
}

impl NoSignalingReport {
    pub fn is_no_signaling(&self) -> bool {
        self.witness.is_none()
    }
}

/// Party `party` changing its setting between the two joint settings shifts
/// the other parties' probability of `others_outcome` by `difference`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalingWitness {
    pub party: usize,
    pub settings: (Vec<usize>, Vec<usize>),
    /// Outcomes of all parties except `party`, in party order.
    pub others_outcome: Vec<usize>,
    pub difference: f64,
}

pub(crate) fn reduced_index(tuple: &[usize], radices: &[usize], skip: usize) -> usize {
    tuple
        .iter()
        .zip(radices)
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .fold(0, |acc, (_, (&v, &r))| acc * r + v)
}

fn unreduced_tuple(mut index: usize, radices: &[usize], skip: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(radices.len() - 1);
    for (i, &r) in radices.iter().enumerate().rev() {
        if i == skip {
            continue;
        }
        out.push(index % r);
        index /= r;
    }
    out.reverse();
    out
}
