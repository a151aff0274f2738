//! Local models that reproduce a no-signaling behavior on a cross of
//! settings through an anchor tuple.
//!
//! Every party's outcome at the anchor is drawn from the anchor's joint
//! distribution. Each remaining (party, setting) outcome is then drawn
//! independently, conditioned on the other parties' anchor outcomes. The
//! marginals of this joint model agree with the input on every setting
//! tuple that differs from the anchor in at most one coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::local_membership_on_subset;
use crate::scalar::Scalar;
use crate::scenario::{Behavior, DeterministicStrategy, ScenarioShape};

/// Setting tuples that differ from `anchor` in at most one coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossSet {
    shape: ScenarioShape,
    anchor: Vec<usize>,
    /// Flat indices, ascending.
    members: Vec<usize>,
}

impl CrossSet {
    pub fn shape(&self) -> &ScenarioShape {
        &self.shape
    }

    pub fn anchor(&self) -> &[usize] {
        &self.anchor
    }

    pub fn anchor_index(&self) -> usize {
        self.shape.setting_index(&self.anchor).expect("validated anchor")
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, setting: usize) -> bool {
        self.members.binary_search(&setting).is_ok()
    }

    /// Flat indices outside the cross set.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.shape.num_settings()).filter(|&z| !self.contains(z)).collect()
    }
}

pub fn cross_set(shape: &ScenarioShape, anchor: &[usize]) -> Result<CrossSet> {
    shape.setting_index(anchor)?;
    let mut members: Vec<usize> = shape
        .setting_tuples()
        .enumerate()
        .filter(|(_, z)| z.iter().zip(anchor).filter(|(a, b)| a != b).count() <= 1)
        .map(|(i, _)| i)
        .collect();
    members.sort_unstable();
    Ok(CrossSet { shape: shape.clone(), anchor: anchor.to_vec(), members })
}

/// Sparse joint distribution over complete outcome assignments.
#[derive(Clone, Debug, PartialEq)]
pub struct JointOutcomeModel<T> {
    shape: ScenarioShape,
    entries: Vec<(T, DeterministicStrategy)>,
}

impl<T: Scalar> JointOutcomeModel<T> {
    pub fn new(shape: ScenarioShape, entries: Vec<(T, DeterministicStrategy)>) -> Result<Self> {
        let mut total = T::zero();
        for (w, d) in &entries {
            if w.is_negative_tol() {
                return Err(Error::InvalidDistribution(format!("negative weight {}", w.display())));
            }
            shape.ensure_same(d.shape())?;
            total = total + w.clone();
        }
        if !(total - T::one()).is_zero_tol() {
            return Err(Error::InvalidDistribution("assignment weights do not sum to 1".into()));
        }
        Ok(Self { shape, entries })
    }

    pub fn shape(&self) -> &ScenarioShape {
        &self.shape
    }

    pub fn entries(&self) -> &[(T, DeterministicStrategy)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Per-setting marginals: the local behavior this model generates.
    pub fn behavior(&self) -> Behavior<T> {
        let shape = &self.shape;
        let mut table = vec![T::zero(); shape.table_len()];
        for (w, d) in &self.entries {
            for (z, o) in d.response_table().into_iter().enumerate() {
                let k = shape.entry(z, o);
                table[k] = table[k].clone() + w.clone();
            }
        }
        Behavior::new(shape.clone(), table).expect("mixture of deterministic behaviors")
    }
}

/// Local behavior agreeing with `p` on the cross set of `anchor`, with its
/// decomposition into deterministic strategies.
///
/// Conditionals whose conditioning event has zero probability are taken
/// to be uniform.
pub fn local_mimic<T: Scalar>(p: &Behavior<T>, anchor: &[usize]) -> Result<(Behavior<T>, JointOutcomeModel<T>)> {
    let shape = p.shape().clone();
    let anchor_index = shape.setting_index(anchor)?;
    if let Some(w) = p.no_signaling_report(&T::tolerance()).witness {
        return Err(Error::Signaling(format!(
            "party {} changes the others' marginal between settings {:?} and {:?} by {}",
            w.party, w.settings.0, w.settings.1, w.difference
        )));
    }

    let k = shape.parties();
    // one independent factor per (party, non-anchor setting)
    let free: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (0..shape.settings()[i]).filter(move |&j| j != anchor[i]).map(move |j| (i, j)))
        .collect();

    let mut entries = Vec::new();
    for anchor_outcome in 0..shape.num_outcomes() {
        let base = p.prob(anchor_index, anchor_outcome).clone();
        if base.is_zero() {
            continue;
        }
        let outs = shape.outcome_tuple(anchor_outcome);
        let factors: Vec<Vec<T>> = free
            .iter()
            .map(|&(i, j)| conditional(p, anchor, i, j, &outs))
            .collect::<Result<_>>()?;

        // odometer over the supports of all factors
        let supports: Vec<Vec<usize>> = factors
            .iter()
            .map(|f| (0..f.len()).filter(|&a| !f[a].is_zero()).collect())
            .collect();
        let mut digits = vec![0usize; free.len()];
        loop {
            let mut weight = base.clone();
            let mut assignment: Vec<Vec<usize>> = (0..k).map(|i| vec![outs[i]; shape.settings()[i]]).collect();
            for (f, (&(i, j), &d)) in free.iter().zip(&digits).enumerate() {
                let a = supports[f][d];
                weight = weight * factors[f][a].clone();
                assignment[i][j] = a;
            }
            entries.push((weight, DeterministicStrategy::new(shape.clone(), assignment)?));
            let Some(pos) = (0..digits.len()).rev().find(|&f| digits[f] + 1 < supports[f].len()) else {
                break;
            };
            digits[pos] += 1;
            digits[pos + 1..].iter_mut().for_each(|d| *d = 0);
        }
    }
    let model = JointOutcomeModel::new(shape, entries)?;
    Ok((model.behavior(), model))
}

/// P(o_i = a at setting j | other parties' anchor outcomes), read off the
/// tuple equal to the anchor except for party i using setting j.
fn conditional<T: Scalar>(p: &Behavior<T>, anchor: &[usize], party: usize, setting: usize, outs: &[usize]) -> Result<Vec<T>> {
    let shape = p.shape();
    let mut z = anchor.to_vec();
    z[party] = setting;
    let zi = shape.setting_index(&z)?;
    let n = shape.outcomes()[party];
    let mut o = outs.to_vec();
    let joint: Vec<T> = (0..n)
        .map(|a| {
            o[party] = a;
            shape.outcome_index(&o).map(|oi| p.prob(zi, oi).clone())
        })
        .collect::<Result<_>>()?;
    let total = joint.iter().cloned().fold(T::zero(), |acc, x| acc + x);
    if total.is_zero_tol() {
        return Ok(vec![T::from_ratio(1, n as i64); n]);
    }
    Ok(joint.into_iter().map(|x| x / total.clone()).collect())
}

/// Whether some local behavior matches `p` on the cross set of `anchor`
/// together with `extra`.
pub fn tightness_check<T: Scalar>(p: &Behavior<T>, anchor: &[usize], extra: &[usize]) -> Result<bool> {
    let cross = cross_set(p.shape(), anchor)?;
    let extra_index = p.shape().setting_index(extra)?;
    if cross.contains(extra_index) {
        return Err(Error::InvalidArgument(format!("extra setting {extra:?} already in the cross set")));
    }
    let mut subset = cross.members().to_vec();
    subset.push(extra_index);
    Ok(local_membership_on_subset(p, &subset)?.is_feasible())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::scenario::{catalog_chsh, enumerate_local_vertices};

    #[test]
    fn bipartite_cross_sets() {
        let shape = ScenarioShape::chsh();
        let c = cross_set(&shape, &[0, 0]).unwrap();
        assert_eq!(c.members(), &[0, 1, 2]);
        assert_eq!(c.complement(), vec![3]);
        for m in 2..=4 {
            let shape = ScenarioShape::uniform(2, m, 2).unwrap();
            for z in shape.setting_tuples() {
                assert_eq!(cross_set(&shape, &z).unwrap().len(), 2 * m - 1);
            }
        }
        assert!(cross_set(&shape, &[2, 0]).is_err());
    }

    #[test]
    fn tripartite_cross_set() {
        let shape = ScenarioShape::uniform(3, 2, 2).unwrap();
        let c = cross_set(&shape, &[0, 0, 0]).unwrap();
        let expected: Vec<usize> = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
            .iter()
            .map(|t| shape.setting_index(t).unwrap())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        assert_eq!(c.members(), expected.as_slice());
    }

    #[test]
    fn pr_box_mimic_is_perfectly_correlated() {
        let pr = Behavior::<Rational>::pr_box();
        let (mimic, model) = local_mimic(&pr, &[0, 0]).unwrap();
        let half = Rational::from_ratio(1, 2);
        let zero = Rational::from_int(0);
        for z in 0..4 {
            // a = b with probability one on every setting pair
            assert_eq!(mimic.row(z), &[half.clone(), zero.clone(), zero.clone(), half.clone()]);
        }
        for z in [0, 1, 2] {
            assert_eq!(mimic.row(z), pr.row(z));
        }
        assert_eq!(catalog_chsh::<Rational>().value(&mimic).unwrap(), Rational::from_int(2));
        assert_eq!(model.len(), 2);
    }

    #[test]
    fn vertices_and_noise_are_reproduced() {
        let shape = ScenarioShape::chsh();
        for v in enumerate_local_vertices(&shape).unwrap() {
            let p = v.to_behavior::<Rational>();
            for anchor in shape.setting_tuples() {
                assert_eq!(local_mimic(&p, &anchor).unwrap().0, p);
            }
        }
        let noise = Behavior::<Rational>::uniform(shape);
        assert_eq!(local_mimic(&noise, &[0, 0]).unwrap().0, noise);
    }

    #[test]
    fn signaling_input_is_rejected() {
        let shape = ScenarioShape::chsh();
        let d = DeterministicStrategy::from_signs([1, 1, 1, -1]);
        let sig = Behavior::<Rational>::from_fn(shape, |z, o| {
            let (x, _) = (z / 2, z % 2);
            Rational::from_int(i64::from(o % 2 == x && o / 2 == d.outcome_at(z) / 2))
        })
        .unwrap();
        assert!(matches!(local_mimic(&sig, &[0, 0]), Err(Error::Signaling(_))));
    }

    #[test]
    fn tightness() {
        let pr = Behavior::<Rational>::pr_box();
        assert!(!tightness_check(&pr, &[0, 0], &[1, 1]).unwrap());
        let half = Rational::from_ratio(1, 2);
        let iso = pr.mix(&Behavior::uniform(ScenarioShape::chsh()), &half).unwrap();
        assert!(tightness_check(&iso, &[0, 0], &[1, 1]).unwrap());
        assert!(tightness_check(&pr, &[0, 0], &[0, 1]).is_err());
    }
}
