use super::SettingDistribution;
use crate::error::Error;
use crate::lp::{LinearProgram, LpOutcome};
use crate::scalar::{check_distribution, Scalar};

const SCALING_ITERATIONS: usize = 200_000;
const SCALING_TOLERANCE: f64 = 1e-12;
const ROUNDING_DENOMINATOR: i64 = 1_000_000_000_000;

/// A prior p(λ) reproducing a target input distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorSolution<T> {
    pub prior: Vec<T>,
    /// The conditional matrix has full column rank.
    pub unique: bool,
    /// Prior is the maximum-entropy solution (always true when unique).
    pub max_entropy: bool,
    /// max_z |Σ_λ p(z|λ)p(λ) − target(z)|.
    pub residual: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum PriorError<T: std::fmt::Debug> {
    /// Farkas vector y over the rows (one per setting, then normalization)
    /// with yᵀA ≤ 0 and yᵀb > 0.
    #[error("no prior reproduces the target distribution")]
    Infeasible { certificate: Vec<T> },
    #[error(transparent)]
    Invalid(#[from] Error),
}

/// Finds p(λ) ≥ 0 with Σ_λ p(z|λ)p(λ) = target(z).
///
/// `conditionals[λ][z]` = p(z|λ). Feasibility is decided by linear
/// programming; when the columns are linearly dependent the
/// maximum-entropy prior is returned, computed by iterative scaling.
pub fn solve_prior<T: Scalar>(
    conditionals: &[Vec<T>],
    target: &SettingDistribution<T>,
) -> Result<PriorSolution<T>, PriorError<T>> {
    let n = target.shape().num_settings();
    if conditionals.is_empty() {
        return Err(Error::InvalidStrategy("empty λ alphabet".into()).into());
    }
    for (k, c) in conditionals.iter().enumerate() {
        if c.len() != n {
            return Err(Error::ShapeMismatch(format!("column {k} has {} entries, expected {n}", c.len())).into());
        }
        check_distribution(c, &format!("p(z|λ_{k})"))?;
    }

    let lp = feasibility_program(conditionals, target.probs());
    let vertex = match lp.solve() {
        LpOutcome::Optimal { x, .. } => x,
        LpOutcome::Infeasible { certificate } => return Err(PriorError::Infeasible { certificate }),
        LpOutcome::Unbounded => unreachable!("feasibility program has zero objective"),
    };

    let unique = column_rank(conditionals) == conditionals.len();
    if unique {
        let residual = residual(conditionals, &vertex, target.probs());
        return Ok(PriorSolution { prior: vertex, unique, max_entropy: true, residual });
    }

    let forced_zero: Vec<bool> = (0..conditionals.len())
        .map(|k| vertex[k].is_zero_tol() && !can_be_positive(&lp, k))
        .collect();
    let scaled = iterative_scaling(conditionals, target.probs(), &forced_zero);
    let prior = round_distribution::<T>(&scaled, |p| residual(conditionals, p, target.probs()) == 0.0);
    let res = residual(conditionals, &prior, target.probs());
    if res <= 1e-9 {
        Ok(PriorSolution { prior, unique, max_entropy: true, residual: res })
    } else {
        let residual = residual(conditionals, &vertex, target.probs());
        Ok(PriorSolution { prior: vertex, unique, max_entropy: false, residual })
    }
}

fn feasibility_program<T: Scalar>(conditionals: &[Vec<T>], target: &[T]) -> LinearProgram<T> {
    let mut rows: Vec<Vec<T>> = (0..target.len())
        .map(|z| conditionals.iter().map(|c| c[z].clone()).collect())
        .collect();
    rows.push(vec![T::one(); conditionals.len()]);
    let mut rhs = target.to_vec();
    rhs.push(T::one());
    LinearProgram::new(rows, rhs, Vec::new())
}

/// Whether some feasible prior puts positive weight on λ_k.
fn can_be_positive<T: Scalar>(lp: &LinearProgram<T>, k: usize) -> bool {
    let mut probe = lp.clone();
    probe.objective = (0..lp.num_vars()).map(|j| if j == k { T::one() } else { T::zero() }).collect();
    matches!(probe.solve(), LpOutcome::Optimal { value, .. } if value.is_positive_tol())
}

fn residual<T: Scalar>(conditionals: &[Vec<T>], prior: &[T], target: &[T]) -> f64 {
    (0..target.len())
        .map(|z| {
            let induced = conditionals
                .iter()
                .zip(prior)
                .fold(T::zero(), |acc, (c, w)| acc + c[z].clone() * w.clone());
            (induced - target[z].clone()).abs().to_f64()
        })
        .fold(0.0, f64::max)
}

/// Rank of the |S|×|Λ| matrix whose columns are the conditionals.
pub fn column_rank<T: Scalar>(conditionals: &[Vec<T>]) -> usize {
    let rows = conditionals.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<T>> = (0..rows)
        .map(|z| conditionals.iter().map(|c| c[z].clone()).collect())
        .collect();
    let cols = conditionals.len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero_tol()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in 0..rows {
            if r == rank || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone() / pivot.clone();
            for c in col..cols {
                let v = m[rank][c].clone();
                m[r][c] = m[r][c].clone() - factor.clone() * v;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Generalized iterative scaling from the uniform prior. Columns sum to
/// one, so the fixed point is the I-projection of the uniform prior onto
/// the feasible set, i.e. its maximum-entropy element.
fn iterative_scaling<T: Scalar>(conditionals: &[Vec<T>], target: &[T], forced_zero: &[bool]) -> Vec<f64> {
    let a: Vec<Vec<f64>> = conditionals.iter().map(|c| c.iter().map(Scalar::to_f64).collect()).collect();
    let t: Vec<f64> = target.iter().map(Scalar::to_f64).collect();
    let free = forced_zero.iter().filter(|z| !**z).count().max(1);
    let mut pi: Vec<f64> = forced_zero
        .iter()
        .map(|&z| if z { 0.0 } else { 1.0 / free as f64 })
        .collect();
    for _ in 0..SCALING_ITERATIONS {
        let induced: Vec<f64> = (0..t.len())
            .map(|z| a.iter().zip(&pi).map(|(c, w)| c[z] * w).sum())
            .collect();
        let err = induced.iter().zip(&t).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if err < SCALING_TOLERANCE {
            break;
        }
        for (w, col) in pi.iter_mut().zip(&a) {
            if *w == 0.0 {
                continue;
            }
            let log_factor: f64 = col
                .iter()
                .zip(t.iter().zip(&induced))
                .filter(|(&p, (&tz, _))| p > 0.0 && tz > 0.0)
                .map(|(&p, (&tz, &iz))| p * (tz / iz).ln())
                .sum();
            *w *= log_factor.exp();
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|w| *w /= total);
    }
    pi
}

/// Converts scaled weights to `T`. In exact mode small-denominator
/// approximations are tried first and kept if they solve the system
/// exactly; otherwise entries are rounded to a fixed denominator. The
/// rounding slack goes on the largest entry so the result sums to one.
fn round_distribution<T: Scalar>(weights: &[f64], exact: impl Fn(&[T]) -> bool) -> Vec<T> {
    if !T::EXACT {
        return weights.iter().map(|&w| T::from_f64(w).unwrap_or_else(T::zero)).collect();
    }
    let largest = (0..weights.len())
        .max_by(|&i, &j| weights[i].total_cmp(&weights[j]))
        .expect("nonempty");
    let normalize = |mut out: Vec<T>| {
        let total = out.iter().cloned().fold(T::zero(), |a, b| a + b);
        out[largest] = out[largest].clone() + (T::one() - total);
        out
    };
    let simple = normalize(
        weights
            .iter()
            .map(|&w| {
                let (n, d) = approximate_fraction(w, 1_000_000);
                T::from_ratio(n, d)
            })
            .collect(),
    );
    if exact(&simple) {
        return simple;
    }
    normalize(
        weights
            .iter()
            .map(|&w| T::from_ratio((w * ROUNDING_DENOMINATOR as f64).round() as i64, ROUNDING_DENOMINATOR))
            .collect(),
    )
}

/// Best continued-fraction convergent of `x ∈ [0, 1]` with denominator ≤ `max_den`.
fn approximate_fraction(x: f64, max_den: i64) -> (i64, i64) {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut rest = x;
    loop {
        let a = rest.floor();
        let (p2, q2) = (a as i64 * p1 + p0, a as i64 * q1 + q0);
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rest - a;
        if frac < 1e-15 || (p1 as f64 / q1 as f64 - x).abs() < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    if q1 == 0 {
        (0, 1)
    } else {
        (p1, q1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::scenario::ScenarioShape;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn hide_column(hidden: usize, good: Rational, rest: Rational) -> Vec<Rational> {
        (0..4).map(|z| if z == hidden { rest.clone() } else { good.clone() }).collect()
    }

    #[test]
    fn anchors_with_uniform_target() {
        let cols: Vec<_> = (0..4).map(|h| hide_column(h, r(1, 3), r(0, 1))).collect();
        let sol = solve_prior(&cols, &SettingDistribution::uniform(ScenarioShape::chsh())).unwrap();
        assert!(sol.unique);
        assert_eq!(sol.prior, vec![r(1, 4); 4]);
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn skewed_target_is_a_single_column() {
        let cols: Vec<_> = (0..4).map(|h| hide_column(h, r(29, 100), r(13, 100))).collect();
        let target =
            SettingDistribution::new(ScenarioShape::chsh(), vec![r(29, 100), r(13, 100), r(29, 100), r(29, 100)])
                .unwrap();
        let sol = solve_prior(&cols, &target).unwrap();
        assert!(sol.unique);
        assert_eq!(sol.prior, vec![r(0, 1), r(1, 1), r(0, 1), r(0, 1)]);
    }

    #[test]
    fn small_bound_cannot_reach_large_entry() {
        let cols: Vec<_> = (0..4).map(|h| hide_column(h, r(26, 100), r(22, 100))).collect();
        let target =
            SettingDistribution::new(ScenarioShape::chsh(), vec![r(29, 100), r(13, 100), r(29, 100), r(29, 100)])
                .unwrap();
        match solve_prior(&cols, &target) {
            Err(PriorError::Infeasible { certificate }) => {
                assert!(feasibility_program(&cols, target.probs()).certifies_infeasibility(&certificate));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dependent_columns_give_max_entropy() {
        // feasible priors are (a, a, 1 − 2a); entropy peaks at a = 1/3
        let cols = vec![
            vec![r(1, 2), r(1, 2), r(0, 1), r(0, 1)],
            vec![r(0, 1), r(0, 1), r(1, 2), r(1, 2)],
            vec![r(1, 4); 4],
        ];
        let sol = solve_prior(&cols, &SettingDistribution::uniform(ScenarioShape::chsh())).unwrap();
        assert!(!sol.unique && sol.max_entropy);
        assert_eq!(sol.prior, vec![r(1, 3); 3]);
        assert_eq!(sol.residual, 0.0);

        let f: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().map(Scalar::to_f64).collect()).collect();
        let sol = solve_prior(&f, &SettingDistribution::uniform(ScenarioShape::chsh())).unwrap();
        assert!((sol.prior[0] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn forced_zeros_are_detected() {
        // the third column can never carry weight under a uniform target
        let cols = vec![vec![r(1, 4); 4], vec![r(1, 4); 4], vec![r(1, 2), r(1, 2), r(0, 1), r(0, 1)]];
        let sol = solve_prior(&cols, &SettingDistribution::uniform(ScenarioShape::chsh())).unwrap();
        assert!(sol.max_entropy);
        assert_eq!(sol.prior, vec![r(1, 2), r(1, 2), r(0, 1)]);
    }

    #[test]
    fn rank_of_circulant() {
        let cols: Vec<_> = (0..4).map(|h| hide_column(h, r(1, 3), r(0, 1))).collect();
        assert_eq!(column_rank(&cols), 4);
        let uniform: Vec<_> = (0..4).map(|h| hide_column(h, r(1, 4), r(1, 4))).collect();
        assert_eq!(column_rank(&uniform), 1);
    }
}
