use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Extreme points of {f : 0 ≤ f(z) ≤ bound, Σ f = 1} in dimension `n`.
///
/// Each vertex has k = ⌊1/bound⌋ entries equal to `bound`, one entry equal
/// to the remainder 1 − k·bound (absent when zero) and zeros elsewhere.
/// Output is in lexicographic order of placements and free of duplicates.
pub fn source_polytope_vertices<T: Scalar>(n: usize, bound: &T) -> Result<Vec<Vec<T>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("source polytope needs at least one setting".into()));
    }
    if !bound.is_positive_tol() || (T::from_usize(n) * bound.clone() - T::one()).is_negative_tol() {
        return Err(Error::OutOfRange(format!(
            "P_M bound {} below 1/{n}",
            bound.display()
        )));
    }
    let bound = if *bound > T::one() { T::one() } else { bound.clone() };
    let mut full = 0usize;
    while full < n && !(T::from_usize(full + 1) * bound.clone() - T::one()).is_positive_tol() {
        full += 1;
    }
    let remainder = T::one() - T::from_usize(full) * bound.clone();
    let has_remainder = !remainder.is_zero_tol();

    let mut out = Vec::new();
    for_each_subset(n, full, |chosen| {
        let base: Vec<T> = (0..n)
            .map(|z| if chosen.contains(&z) { bound.clone() } else { T::zero() })
            .collect();
        if has_remainder {
            for z in (0..n).filter(|z| !chosen.contains(z)) {
                let mut v = base.clone();
                v[z] = remainder.clone();
                out.push(v);
            }
        } else {
            out.push(base);
        }
    });
    out.sort_by(|a, b| {
        b.iter()
            .zip(a)
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// Number of source-polytope vertices without materializing them.
pub fn source_polytope_vertex_count<T: Scalar>(n: usize, bound: &T) -> Result<u128> {
    if !bound.is_positive_tol() || (T::from_usize(n) * bound.clone() - T::one()).is_negative_tol() {
        return Err(Error::OutOfRange(format!("P_M bound {} below 1/{n}", bound.display())));
    }
    let bound = if *bound > T::one() { T::one() } else { bound.clone() };
    let mut full = 0usize;
    while full < n && !(T::from_usize(full + 1) * bound.clone() - T::one()).is_positive_tol() {
        full += 1;
    }
    let remainder = T::one() - T::from_usize(full) * bound;
    let choose = binomial(n, full);
    Ok(if remainder.is_zero_tol() { choose } else { choose * (n - full) as u128 })
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn half_bound_on_four_settings() {
        let v = source_polytope_vertices(4, &r(1, 2)).unwrap();
        assert_eq!(v.len(), 6);
        assert_eq!(v[0], vec![r(1, 2), r(1, 2), r(0, 1), r(0, 1)]);
        assert_eq!(source_polytope_vertex_count(4, &r(1, 2)).unwrap(), 6);
    }

    #[test]
    fn remainder_vertices() {
        let v = source_polytope_vertices(4, &r(27, 100)).unwrap();
        assert_eq!(v.len(), 4);
        for x in &v {
            let mut sorted = x.clone();
            sorted.sort();
            assert_eq!(sorted, vec![r(19, 100), r(27, 100), r(27, 100), r(27, 100)]);
        }
    }

    #[test]
    fn point_masses_and_uniform() {
        assert_eq!(source_polytope_vertices(4, &r(1, 1)).unwrap().len(), 4);
        assert_eq!(source_polytope_vertices(4, &r(1, 4)).unwrap(), vec![vec![r(1, 4); 4]]);
        assert!(source_polytope_vertices(4, &r(1, 5)).is_err());
        // f64 bound of 1/3 should not pick up a spurious remainder
        assert_eq!(source_polytope_vertices(3, &(1.0 / 3.0)).unwrap().len(), 1);
    }

    #[test]
    fn every_vertex_is_feasible() {
        for n in 1..=6 {
            for b in [r(1, 5), r(27, 100), r(1, 3), r(1, 2), r(7, 10)] {
                let Ok(vs) = source_polytope_vertices(n, &b) else { continue };
                for v in vs {
                    assert_eq!(v.iter().cloned().sum::<Rational>(), r(1, 1));
                    assert!(v.iter().all(|x| *x >= r(0, 1) && *x <= b));
                }
            }
        }
    }
}
