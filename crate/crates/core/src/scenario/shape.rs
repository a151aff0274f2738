use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of parties, settings per party and outcomes per party.
///
/// Joint settings and joint outcomes are flattened in row-major order with
/// party 0 most significant, matching the nested JSON tables
/// `[z_1]...[z_K][o_1]...[o_K]`. All indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr")]
pub struct ScenarioShape {
    settings: Vec<usize>,
    outcomes: Vec<usize>,
}

#[derive(Deserialize)]
struct ShapeRepr {
    settings: Vec<usize>,
    outcomes: Vec<usize>,
}

impl TryFrom<ShapeRepr> for ScenarioShape {
    type Error = Error;

    fn try_from(r: ShapeRepr) -> Result<Self> {
        Self::new(r.settings, r.outcomes)
    }
}

impl ScenarioShape {
    pub fn new(settings: Vec<usize>, outcomes: Vec<usize>) -> Result<Self> {
        if settings.len() != outcomes.len() {
            return Err(Error::InvalidShape(format!(
                "{} setting counts but {} outcome counts",
                settings.len(),
                outcomes.len()
            )));
        }
        if settings.len() < 2 {
            return Err(Error::InvalidShape("a Bell scenario needs at least two parties".into()));
        }
        if let Some(m) = settings.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidShape(format!("setting count {m} < 2")));
        }
        if let Some(d) = outcomes.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidShape(format!("outcome count {d} < 2")));
        }
        Ok(Self { settings, outcomes })
    }

    /// `parties` parties with `settings` settings and `outcomes` outcomes each.
    pub fn uniform(parties: usize, settings: usize, outcomes: usize) -> Result<Self> {
        Self::new(vec![settings; parties], vec![outcomes; parties])
    }

    /// The two-party, two-setting, binary-outcome scenario.
    pub fn chsh() -> Self {
        Self::uniform(2, 2, 2).expect("valid")
    }

    pub fn parties(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    /// |S| = Π m_i.
    pub fn num_settings(&self) -> usize {
        self.settings.iter().product()
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.iter().product()
    }

    /// Number of entries in a behavior table.
    pub fn table_len(&self) -> usize {
        self.num_settings() * self.num_outcomes()
    }

    pub fn setting_tuple(&self, index: usize) -> Vec<usize> {
        unflatten(index, &self.settings)
    }

    pub fn setting_index(&self, tuple: &[usize]) -> Result<usize> {
        flatten(tuple, &self.settings).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "setting tuple {tuple:?} invalid for settings {:?}",
                self.settings
            ))
        })
    }

    pub fn outcome_tuple(&self, index: usize) -> Vec<usize> {
        unflatten(index, &self.outcomes)
    }

    pub fn outcome_index(&self, tuple: &[usize]) -> Result<usize> {
        flatten(tuple, &self.outcomes).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "outcome tuple {tuple:?} invalid for outcomes {:?}",
                self.outcomes
            ))
        })
    }

    /// Position of p(o|z) in a flat table.
    pub fn entry(&self, setting: usize, outcome: usize) -> usize {
        setting * self.num_outcomes() + outcome
    }

    pub fn setting_tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_settings()).map(|z| self.setting_tuple(z))
    }

    pub(crate) fn ensure_same(&self, other: &ScenarioShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

pub(crate) fn flatten(tuple: &[usize], radices: &[usize]) -> Option<usize> {
    if tuple.len() != radices.len() {
        return None;
    }
    tuple.iter().zip(radices).try_fold(0usize, |acc, (&v, &r)| (v < r).then(|| acc * r + v))
}

pub(crate) fn unflatten(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    out
}
