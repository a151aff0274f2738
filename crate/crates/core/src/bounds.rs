//! Closed-form thresholds on source randomness, reported per run in bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{BellFunctional, HidingMetadata, Limits, ScenarioShape};
use crate::sources::SettingDistribution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NoSignalingLimit,
    QuantumLimit,
}

/// Below `per_run_min_entropy_threshold` bits per run (equivalently, with
/// P_M at or above `p_max_threshold`) a local model can reach the regime's
/// value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub per_run_min_entropy_threshold: f64,
    pub p_max_threshold: f64,
    pub regime: Regime,
    pub inequality_dependent: bool,
}

impl BoundReport {
    fn from_count(count: usize, regime: Regime, inequality_dependent: bool) -> Self {
        Self {
            per_run_min_entropy_threshold: (count as f64).log2(),
            p_max_threshold: 1.0 / count as f64,
            regime,
            inequality_dependent,
        }
    }
}

/// log₂(Σ m_k − K + 1): the size of a cross set of settings.
pub fn theorem1_threshold(shape: &ScenarioShape) -> BoundReport {
    let count = shape.settings().iter().sum::<usize>() - shape.parties() + 1;
    BoundReport::from_count(count, Regime::NoSignalingLimit, false)
}

/// log₂|S^B_g| for an inequality whose hidden-set size does not depend on
/// the local strategy.
pub fn ns_threshold(meta: &HidingMetadata) -> Result<BoundReport> {
    if !meta.symmetric {
        return Err(Error::MissingMetadata(
            "hidden-set size varies with the local strategy; use the LP instead".into(),
        ));
    }
    if meta.good_settings == 0 {
        return Err(Error::MissingMetadata("no good settings recorded".into()));
    }
    Ok(BoundReport::from_count(meta.good_settings, Regime::NoSignalingLimit, true))
}

pub fn ns_threshold_of<T: Scalar>(f: &BellFunctional<T>) -> Result<BoundReport> {
    let meta = f
        .hiding_metadata()
        .ok_or_else(|| Error::MissingMetadata(format!("{} has no hiding metadata", f.name())))?;
    ns_threshold(&meta)
}

/// P_M at which an i.i.d. source reaches the quantum limit:
/// (1/|S|)·[1 + ((B_Q − B_L)/(B_NS − B_L))·(|S|/|S_g| − 1)].
pub fn quantum_pm_threshold_from(limits: &Limits, total_settings: usize, good_settings: usize) -> Result<f64> {
    let local = limits.local.ok_or_else(|| Error::MissingMetadata("local bound".into()))?;
    let quantum = limits.quantum.ok_or_else(|| Error::MissingMetadata("quantum bound".into()))?;
    let ns = limits.no_signaling.ok_or_else(|| Error::MissingMetadata("no-signaling bound".into()))?;
    if ns <= local || good_settings == 0 || total_settings == 0 {
        return Err(Error::InvalidArgument("degenerate limits or settings counts".into()));
    }
    let s = total_settings as f64;
    let fraction = (quantum - local) / (ns - local);
    Ok((1.0 + fraction * (s / good_settings as f64 - 1.0)) / s)
}

pub fn quantum_pm_threshold<T: Scalar>(f: &BellFunctional<T>) -> Result<f64> {
    let good = f
        .good_set_size()
        .ok_or_else(|| Error::MissingMetadata(format!("{} has no good-set size", f.name())))?;
    quantum_pm_threshold_from(f.limits(), f.shape().num_settings(), good)
}

pub fn quantum_threshold<T: Scalar>(f: &BellFunctional<T>) -> Result<BoundReport> {
    let p = quantum_pm_threshold(f)?;
    Ok(BoundReport {
        per_run_min_entropy_threshold: -p.log2(),
        p_max_threshold: p,
        regime: Regime::QuantumLimit,
        inequality_dependent: true,
    })
}

/// Largest CHSH value a P_M-bounded local model can show given the input
/// distribution, valid for max p_obs ≤ P_M < 1/3:
///
/// 4 − ½[(1 − 3P)q + (1 − 3P)(q − 16)/(4P − 1)], q = Σ_z 1/p_obs(z).
///
/// At P = 1/4 the inputs must be uniform and the value is 2.
pub fn chsh_analytic_max<T: Scalar>(p_obs: &SettingDistribution<T>, p_max: &T) -> Result<T> {
    if p_obs.probs().len() != 4 || p_obs.shape() != &ScenarioShape::chsh() {
        return Err(Error::ShapeMismatch("CHSH formula needs the 2×2 settings scenario".into()));
    }
    let third = T::from_ratio(1, 3);
    if (p_obs.max() - p_max.clone()).is_positive_tol() || !(third - p_max.clone()).is_positive_tol() {
        return Err(Error::OutOfRange(format!(
            "need max p_obs ≤ P_M < 1/3, got P_M = {} with max p_obs = {}",
            p_max.display(),
            p_obs.max().display()
        )));
    }
    let q = p_obs
        .inverse_sum()
        .ok_or_else(|| Error::OutOfRange("p_obs has a zero entry".into()))?;
    let denom = T::from_int(4) * p_max.clone() - T::one();
    if denom.is_zero_tol() {
        return Ok(T::from_int(2));
    }
    let slack = T::one() - T::from_int(3) * p_max.clone();
    let correction = slack.clone() * q.clone() + slack * (q - T::from_int(16)) / denom;
    Ok(T::from_int(4) - correction / T::from_int(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::scenario::{catalog_chained, catalog_chsh, MerminInfo};

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn theorem1_values() {
        let chsh = theorem1_threshold(&ScenarioShape::chsh());
        assert!((chsh.per_run_min_entropy_threshold - 3f64.log2()).abs() < 1e-12);
        assert!((chsh.p_max_threshold - 1.0 / 3.0).abs() < 1e-15);
        for m in 2..6 {
            let b = theorem1_threshold(&ScenarioShape::uniform(2, m, 2).unwrap());
            assert!((b.per_run_min_entropy_threshold - ((2 * m - 1) as f64).log2()).abs() < 1e-12);
        }
        let tri = theorem1_threshold(&ScenarioShape::uniform(3, 2, 2).unwrap());
        assert_eq!(tri.per_run_min_entropy_threshold, 2.0);
    }

    #[test]
    fn ns_values() {
        let chsh = ns_threshold_of(&catalog_chsh::<f64>()).unwrap();
        assert!((chsh.per_run_min_entropy_threshold - 3f64.log2()).abs() < 1e-12);
        let chained = ns_threshold_of(&catalog_chained::<f64>(4).unwrap()).unwrap();
        assert!((chained.per_run_min_entropy_threshold - 15f64.log2()).abs() < 1e-12);
        let mermin = ns_threshold(&MerminInfo::new(5).unwrap().hiding_metadata()).unwrap();
        assert!((mermin.per_run_min_entropy_threshold - 10f64.log2()).abs() < 1e-12);
        let mut asym = MerminInfo::new(5).unwrap().hiding_metadata();
        asym.symmetric = false;
        assert!(ns_threshold(&asym).is_err());
    }

    #[test]
    fn quantum_values() {
        let f = catalog_chsh::<f64>();
        let p = quantum_pm_threshold(&f).unwrap();
        assert!((p - 0.25 * (1.0 + (2f64.sqrt() - 1.0) / 3.0)).abs() < 1e-15);
        let mut lim = *f.limits();
        lim.quantum = lim.local;
        assert_eq!(quantum_pm_threshold_from(&lim, 4, 3).unwrap(), 0.25);
        lim.quantum = lim.no_signaling;
        assert!((quantum_pm_threshold_from(&lim, 4, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(quantum_pm_threshold(&catalog_chained::<f64>(3).unwrap()).is_err());
    }

    #[test]
    fn analytic_chsh() {
        let shape = ScenarioShape::chsh();
        let uniform = SettingDistribution::<Rational>::uniform(shape.clone());
        assert_eq!(chsh_analytic_max(&uniform, &r(27, 100)).unwrap(), r(248, 100));
        assert_eq!(chsh_analytic_max(&uniform, &r(1, 4)).unwrap(), r(2, 1));
        let skew = SettingDistribution::new(shape, vec![r(29, 100), r(13, 100), r(29, 100), r(29, 100)]).unwrap();
        assert_eq!(chsh_analytic_max(&skew, &r(29, 100)).unwrap(), r(2, 1));
        assert!(chsh_analytic_max(&skew, &r(28, 100)).is_err());
        assert!(chsh_analytic_max(&uniform, &r(1, 3)).is_err());
        let near = chsh_analytic_max(&uniform.to_f64(), &(1.0 / 3.0 - 1e-8)).unwrap();
        assert!((near - 4.0).abs() < 1e-6);
    }
}
