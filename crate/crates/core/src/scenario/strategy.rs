use serde::{Deserialize, Serialize};

use super::{Behavior, ScenarioShape};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default cap on the number of enumerated local vertices.
pub const DEFAULT_VERTEX_CAP: u128 = 1_000_000;

/// Local deterministic response: party i answers `assignment[i][z_i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    shape: ScenarioShape,
    assignment: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    pub fn new(shape: ScenarioShape, assignment: Vec<Vec<usize>>) -> Result<Self> {
        if assignment.len() != shape.parties() {
            return Err(Error::ShapeMismatch(format!(
                "assignment for {} parties, shape has {}",
                assignment.len(),
                shape.parties()
            )));
        }
        for (i, table) in assignment.iter().enumerate() {
            if table.len() != shape.settings()[i] {
                return Err(Error::ShapeMismatch(format!(
                    "party {i}: {} answers for {} settings",
                    table.len(),
                    shape.settings()[i]
                )));
            }
            if let Some(&o) = table.iter().find(|&&o| o >= shape.outcomes()[i]) {
                return Err(Error::ShapeMismatch(format!("party {i}: outcome {o} out of range")));
            }
        }
        Ok(Self { shape, assignment })
    }

    /// Bipartite binary strategy from ±1 labels (a_0, a_1, b_0, b_1); +1 maps
    /// to outcome 0 and −1 to outcome 1.
    pub fn from_signs(signs: [i8; 4]) -> Self {
        let o = |s: i8| usize::from(s < 0);
        Self::new(
            ScenarioShape::chsh(),
            vec![vec![o(signs[0]), o(signs[1])], vec![o(signs[2]), o(signs[3])]],
        )
        .expect("CHSH assignment")
    }

    pub fn shape(&self) -> &ScenarioShape {
        &self.shape
    }

    pub fn assignment(&self) -> &[Vec<usize>] {
        &self.assignment
    }

    pub fn outcome_tuple(&self, settings: &[usize]) -> Vec<usize> {
        settings
            .iter()
            .zip(&self.assignment)
            .map(|(&z, table)| table[z])
            .collect()
    }

    /// Flat outcome index answered at flat setting index `z`.
    pub fn outcome_at(&self, setting: usize) -> usize {
        let tuple = self.outcome_tuple(&self.shape.setting_tuple(setting));
        self.shape.outcome_index(&tuple).expect("valid outcomes")
    }

    /// Flat outcome index for every flat setting index.
    pub fn response_table(&self) -> Vec<usize> {
        (0..self.shape.num_settings()).map(|z| self.outcome_at(z)).collect()
    }

    pub fn to_behavior<T: Scalar>(&self) -> Behavior<T> {
        let responses = self.response_table();
        Behavior::from_fn(self.shape.clone(), |z, o| {
            if responses[z] == o {
                T::one()
            } else {
                T::zero()
            }
        })
        .expect("deterministic behavior is normalized")
    }
}

/// Π_i d_i^{m_i}, or `None` on overflow.
pub fn local_vertex_count(shape: &ScenarioShape) -> Option<u128> {
    shape
        .settings()
        .iter()
        .zip(shape.outcomes())
        .try_fold(1u128, |acc, (&m, &d)| acc.checked_mul((d as u128).checked_pow(m as u32)?))
}

/// All deterministic local strategies of `shape`.
///
/// Order is lexicographic over the concatenated assignment tables
/// `(o^1_0, ..., o^1_{m_1-1}, o^2_0, ..., o^K_{m_K-1})`, last entry fastest.
pub fn enumerate_local_vertices(shape: &ScenarioShape) -> Result<Vec<DeterministicStrategy>> {
    enumerate_local_vertices_capped(shape, DEFAULT_VERTEX_CAP)
}

pub fn enumerate_local_vertices_capped(
    shape: &ScenarioShape,
    cap: u128,
) -> Result<Vec<DeterministicStrategy>> {
    let count = local_vertex_count(shape).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::ResourceCap { what: "local vertex", count, cap });
    }
    let radices: Vec<usize> = shape
        .settings()
        .iter()
        .zip(shape.outcomes())
        .flat_map(|(&m, &d)| std::iter::repeat_n(d, m))
        .collect();
    let mut digits = vec![0usize; radices.len()];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        let mut assignment = Vec::with_capacity(shape.parties());
        let mut offset = 0;
        for &m in shape.settings() {
            assignment.push(digits[offset..offset + m].to_vec());
            offset += m;
        }
        out.push(DeterministicStrategy { shape: shape.clone(), assignment });
        // odometer increment, last digit fastest
        let mut pos = radices.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < radices[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Zero;

    #[test]
    fn vertex_counts() {
        let chsh = ScenarioShape::chsh();
        assert_eq!(enumerate_local_vertices(&chsh).unwrap().len(), 16);
        let chained3 = ScenarioShape::uniform(2, 3, 2).unwrap();
        assert_eq!(enumerate_local_vertices(&chained3).unwrap().len(), 64);
        let three = ScenarioShape::uniform(3, 2, 2).unwrap();
        assert_eq!(enumerate_local_vertices(&three).unwrap().len(), 64);
        let mixed = ScenarioShape::new(vec![2, 3], vec![3, 2]).unwrap();
        assert_eq!(enumerate_local_vertices(&mixed).unwrap().len(), 9 * 8);
    }

    #[test]
    fn canonical_order_and_uniqueness() {
        let v = enumerate_local_vertices(&ScenarioShape::chsh()).unwrap();
        assert_eq!(v[0].assignment(), &[vec![0, 0], vec![0, 0]]);
        assert_eq!(v[1].assignment(), &[vec![0, 0], vec![0, 1]]);
        assert_eq!(v[15].assignment(), &[vec![1, 1], vec![1, 1]]);
        let set: std::collections::HashSet<_> = v.iter().collect();
        assert_eq!(set.len(), 16);
    }

    #[test]
    fn cap_is_enforced() {
        let big = ScenarioShape::uniform(4, 6, 2).unwrap();
        assert!(matches!(enumerate_local_vertices(&big), Err(Error::ResourceCap { .. })));
        assert!(enumerate_local_vertices_capped(&ScenarioShape::chsh(), 15).is_err());
    }

    #[test]
    fn deterministic_behaviors_are_zero_one_and_no_signaling() {
        for v in enumerate_local_vertices(&ScenarioShape::uniform(3, 2, 2).unwrap()).unwrap() {
            let b: Behavior<Rational> = v.to_behavior();
            assert!(b.table().iter().all(|p| p.is_zero() || *p == Rational::from_int(1)));
            assert!(b.is_no_signaling(&Rational::zero()));
        }
    }
}
