//! Seeded generators of test inputs: no-signaling behaviors and
//! measurement-dependent response models.

use rand::Rng;
use rand_distr::Exp1;

use crate::scalar::{Rational, Scalar};
use crate::scenario::{enumerate_local_vertices, Behavior, DeterministicStrategy, ScenarioShape};
use crate::sources::{LocalResponseModel, SettingDistribution};

const WEIGHT_DENOMINATOR: i64 = 1_000_000;

/// Flat Dirichlet sample rounded to multiples of 10⁻⁶, summing to one exactly.
pub fn dirichlet_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Rational> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let mut units: Vec<i64> = raw
        .iter()
        .map(|x| (x / total * WEIGHT_DENOMINATOR as f64).round() as i64)
        .collect();
    let largest = (0..n).max_by_key(|&i| units[i]).expect("nonempty");
    units[largest] += WEIGHT_DENOMINATOR - units.iter().sum::<i64>();
    units.into_iter().map(|u| Rational::from_ratio(u, WEIGHT_DENOMINATOR)).collect()
}

/// The 24 extreme points of the 2×2 binary no-signaling polytope: 16
/// deterministic boxes and 8 PR-box relabelings.
pub fn chsh_ns_vertices() -> Vec<Behavior<Rational>> {
    let mut out: Vec<Behavior<Rational>> = enumerate_local_vertices(&ScenarioShape::chsh())
        .expect("small scenario")
        .iter()
        .map(DeterministicStrategy::to_behavior)
        .collect();
    for bits in 0..8u8 {
        out.push(Behavior::pr_box_variant(bits & 4 != 0, bits & 2 != 0, bits & 1 != 0));
    }
    out
}

/// Random mixture of the 24 CHSH no-signaling vertices.
pub fn random_chsh_ns_behavior<R: Rng + ?Sized>(rng: &mut R) -> Behavior<Rational> {
    let vertices = chsh_ns_vertices();
    let weights = dirichlet_weights(rng, vertices.len());
    Behavior::mixture(&weights.into_iter().zip(vertices).collect::<Vec<_>>()).expect("convex mixture")
}

/// PR correlations between parties 0 and 1 on their first two settings.
///
/// Off that block the PR parties answer uniformly at random on outcomes
/// {0, 1} when their own setting is in the block and deterministically
/// otherwise; all other parties follow `rest`. Marginals then depend only
/// on each party's own setting.
pub fn embedded_pr_box(shape: &ScenarioShape, rest: &DeterministicStrategy) -> Behavior<Rational> {
    let half = Rational::from_ratio(1, 2);
    Behavior::from_fn(shape.clone(), |z, o| {
        let zs = shape.setting_tuple(z);
        let os = shape.outcome_tuple(o);
        let det = rest.outcome_tuple(&zs);
        if (2..shape.parties()).any(|i| os[i] != det[i]) {
            return Rational::from_int(0);
        }
        let (x, y, a, b) = (zs[0], zs[1], os[0], os[1]);
        let hit = match (x < 2, y < 2) {
            (true, true) => a < 2 && b < 2 && (a ^ b) == (x & y),
            (true, false) => a < 2 && b == det[1],
            (false, true) => b < 2 && a == det[0],
            (false, false) => a == det[0] && b == det[1],
        };
        let mass = match (x < 2, y < 2) {
            (false, false) => Rational::from_int(1),
            _ => half.clone(),
        };
        if hit {
            mass
        } else {
            Rational::from_int(0)
        }
    })
    .expect("valid embedded PR box")
}

fn random_vertex<R: Rng + ?Sized>(rng: &mut R, shape: &ScenarioShape) -> DeterministicStrategy {
    let assignment = shape
        .settings()
        .iter()
        .zip(shape.outcomes())
        .map(|(&m, &d)| (0..m).map(|_| rng.random_range(0..d)).collect())
        .collect();
    DeterministicStrategy::new(shape.clone(), assignment).expect("in range")
}

/// Random no-signaling behavior for any shape: a Dirichlet mixture of
/// `components` random local vertices and the same number of embedded PR
/// boxes.
pub fn random_ns_behavior<R: Rng + ?Sized>(rng: &mut R, shape: &ScenarioShape, components: usize) -> Behavior<Rational> {
    let mut parts: Vec<Behavior<Rational>> = Vec::with_capacity(2 * components);
    for _ in 0..components {
        parts.push(random_vertex(rng, shape).to_behavior());
        let rest = random_vertex(rng, shape);
        parts.push(embedded_pr_box(shape, &rest));
    }
    let weights = dirichlet_weights(rng, parts.len());
    Behavior::mixture(&weights.into_iter().zip(parts).collect::<Vec<_>>()).expect("convex mixture")
}

fn small_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize, allow_zero: bool) -> Vec<Rational> {
    let low = u32::from(!allow_zero);
    let units: Vec<i64> = (0..n).map(|_| i64::from(rng.random_range(low..=12u32))).collect();
    let total: i64 = units.iter().sum();
    if total == 0 {
        return (0..n).map(|i| Rational::from_int(i64::from(i == 0))).collect();
    }
    units.into_iter().map(|u| Rational::from_ratio(u, total)).collect()
}

/// Random stochastic-response model with up to `max_lambdas` hidden values,
/// together with a random full-support input distribution.
pub fn random_response_model<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &ScenarioShape,
    max_lambdas: usize,
) -> (LocalResponseModel<Rational>, SettingDistribution<Rational>) {
    let k = rng.random_range(1..=max_lambdas);
    let responses = (0..k)
        .map(|_| {
            shape
                .settings()
                .iter()
                .zip(shape.outcomes())
                .map(|(&m, &d)| (0..m).map(|_| small_distribution(rng, d, true)).collect())
                .collect()
        })
        .collect();
    let posterior = (0..shape.num_settings()).map(|_| small_distribution(rng, k, true)).collect();
    let p_obs = small_distribution(rng, shape.num_settings(), false);
    (
        LocalResponseModel::new(shape.clone(), responses, posterior).expect("valid random model"),
        SettingDistribution::new(shape.clone(), p_obs).expect("valid input distribution"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chsh_samples_are_no_signaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = random_chsh_ns_behavior(&mut rng);
            assert!(p.is_no_signaling(&Rational::from_int(0)));
        }
        assert_eq!(chsh_ns_vertices().len(), 24);
    }

    #[test]
    fn embedded_boxes_are_no_signaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for shape in [
            ScenarioShape::uniform(3, 2, 2).unwrap(),
            ScenarioShape::new(vec![3, 2], vec![2, 3]).unwrap(),
            ScenarioShape::new(vec![2, 3, 2], vec![3, 2, 2]).unwrap(),
        ] {
            let p = random_ns_behavior(&mut rng, &shape, 3);
            assert!(p.is_no_signaling(&Rational::from_int(0)), "{shape:?}");
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = dirichlet_weights(&mut rng, 24);
        assert_eq!(w.into_iter().sum::<Rational>(), Rational::from_int(1));
    }
}
