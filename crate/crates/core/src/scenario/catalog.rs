//! Standard Bell expressions, materialized as full probability coefficients.
//!
//! Correlator expressions ⟨a_x b_y⟩ are expanded with outcome 0 ↦ +1 and
//! outcome 1 ↦ −1, i.e. ⟨a_x b_y⟩ = Σ_{ab} (−1)^{a+b} p(ab|xy).

use serde::{Deserialize, Serialize};

use super::{BellFunctional, HidingMetadata, Limits, ScenarioShape};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn sign<T: Scalar>(negative: bool) -> T {
    if negative {
        -T::one()
    } else {
        T::one()
    }
}

fn chsh_coefficients<T: Scalar>() -> Vec<T> {
    let shape = ScenarioShape::chsh();
    (0..shape.table_len())
        .map(|i| {
            let (z, o) = (i / 4, i % 4);
            let (x, y) = (z / 2, z % 2);
            let (a, b) = (o / 2, o % 2);
            sign::<T>(x == 1 && y == 1) * sign::<T>((a + b) % 2 == 1)
        })
        .collect()
}

/// ⟨a_0b_0⟩ + ⟨a_0b_1⟩ + ⟨a_1b_0⟩ − ⟨a_1b_1⟩, limits (2, 2√2, 4, 4).
pub fn catalog_chsh<T: Scalar>() -> BellFunctional<T> {
    let limits = Limits {
        local: Some(2.0),
        quantum: Some(2.0 * std::f64::consts::SQRT_2),
        no_signaling: Some(4.0),
        algebraic: Some(4.0),
    };
    BellFunctional::new("chsh", ScenarioShape::chsh(), chsh_coefficients(), limits)
        .expect("valid CHSH")
        .with_hiding(1, 3, true)
}

/// CHSH + α⟨a_0⟩ for α ∈ [0, 2].
///
/// The marginal term is split evenly over Bob's two settings:
/// α⟨a_0⟩ ↦ (α/2)(⟨a_0⟩_{y=0} + ⟨a_0⟩_{y=1}).
pub fn catalog_tilted_chsh<T: Scalar>(alpha: T) -> Result<BellFunctional<T>> {
    if alpha < T::zero() || alpha > T::from_int(2) {
        return Err(Error::OutOfRange(format!("tilt {} not in [0, 2]", alpha.display())));
    }
    let half = alpha.clone() / T::from_int(2);
    let coefficients = chsh_coefficients::<T>()
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let (z, o) = (i / 4, i % 4);
            if z / 2 == 0 {
                c + half.clone() * sign::<T>(o / 2 == 1)
            } else {
                c
            }
        })
        .collect();
    let a = alpha.to_f64();
    let limits = Limits {
        local: Some(2.0 + a),
        quantum: None,
        no_signaling: Some(4.0),
        algebraic: Some(4.0 + a),
    };
    let name = format!("tilted_chsh({})", alpha.display());
    Ok(BellFunctional::new(name, ScenarioShape::chsh(), coefficients, limits)?.with_hiding(1, 3, true))
}

/// Chained expression with `m` settings per party (0-based labels):
///
/// p(a = b | 0, m−1) + Σ_{x ∈ {y, y+1}} p(a ≠ b | x, y) ≤ 2m − 1.
pub fn catalog_chained<T: Scalar>(m: usize) -> Result<BellFunctional<T>> {
    if m < 2 {
        return Err(Error::OutOfRange(format!("chained expression needs m ≥ 2, got {m}")));
    }
    let shape = ScenarioShape::uniform(2, m, 2)?;
    let mut coefficients = vec![T::zero(); shape.table_len()];
    let mut set = |x: usize, y: usize, equal: bool| {
        let z = x * m + y;
        for o in 0..4 {
            let (a, b) = (o / 2, o % 2);
            if (a == b) == equal {
                coefficients[z * 4 + o] = T::one();
            }
        }
    };
    set(0, m - 1, true);
    for y in 0..m {
        set(y, y, false);
        if y + 1 < m {
            set(y + 1, y, false);
        }
    }
    let limits = Limits {
        local: Some((2 * m - 1) as f64),
        quantum: None,
        no_signaling: Some((2 * m) as f64),
        algebraic: Some((2 * m) as f64),
    };
    Ok(BellFunctional::new(format!("chained({m})"), shape, coefficients, limits)?
        .with_hiding(1, m * m - 1, true))
}

/// Settings metadata of the odd-K Mermin expressions. Only the set sizes
/// are tabulated, not the coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerminInfo {
    pub parties: usize,
}

impl MerminInfo {
    pub fn new(parties: usize) -> Result<Self> {
        if parties < 3 || parties.is_multiple_of(2) {
            return Err(Error::OutOfRange(format!(
                "Mermin metadata is tabulated for odd K ≥ 3, got {parties}"
            )));
        }
        Ok(Self { parties })
    }

    pub fn total_settings(&self) -> usize {
        1 << self.parties
    }

    /// |S^B| = 2^{K−1}.
    pub fn used_settings(&self) -> usize {
        1 << (self.parties - 1)
    }

    /// |S^B_g| = 2^{K−2} + 2^{(K−3)/2}.
    pub fn good_settings(&self) -> usize {
        (1 << (self.parties - 2)) + (1 << ((self.parties - 3) / 2))
    }

    pub fn hiding_metadata(&self) -> HidingMetadata {
        HidingMetadata {
            total_settings: self.total_settings(),
            used_settings: self.used_settings(),
            good_settings: self.good_settings(),
            hidden_settings: self.used_settings() - self.good_settings(),
            symmetric: true,
        }
    }

    pub fn shape(&self) -> ScenarioShape {
        ScenarioShape::uniform(self.parties, 2, 2).expect("valid")
    }
}
