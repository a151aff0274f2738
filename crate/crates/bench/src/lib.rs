//! Shared inputs for the benchmarks.

use bellmd_core::{Rational, Scalar, ScenarioShape, SettingDistribution};

/// Input distributions of the CHSH sweep curves.
pub fn sweep_inputs<T: Scalar>() -> Vec<(&'static str, SettingDistribution<T>)> {
    let make = |probs: [(i64, i64); 4]| {
        SettingDistribution::new(
            ScenarioShape::chsh(),
            probs.iter().map(|&(n, d)| T::from_ratio(n, d)).collect(),
        )
        .expect("valid distribution")
    };
    vec![
        ("uniform", make([(1, 4); 4])),
        ("skewed", make([(29, 100), (13, 100), (29, 100), (29, 100)])),
        ("pairs", make([(3, 10), (3, 10), (2, 10), (2, 10)])),
        ("near_uniform", make([(26, 100), (26, 100), (26, 100), (22, 100)])),
    ]
}

/// `points` evenly spaced bounds from `max p_obs` up to just below 1/3.
pub fn sweep_grid(start: &Rational, points: usize) -> Vec<Rational> {
    let stop = Rational::from_ratio(333, 1000);
    let step = (stop - start.clone()) / Rational::from_usize(points.max(2) - 1);
    (0..points).map(|k| start.clone() + step.clone() * Rational::from_usize(k)).collect()
}
