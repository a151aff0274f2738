//! Linear programs over local × source product decompositions.
//!
//! A measurement-dependent local model with P_M ≤ bound generates joint
//! statistics p(o,z) = Σ_ij γ_ij e_i(o|z) f_j(z), where e_i are local
//! deterministic vertices and f_j the vertices of the source polytope
//! {f : 0 ≤ f(z) ≤ bound, Σ f = 1}. Fixing the observed input marginal and
//! maximizing a Bell functional over γ is a linear program.

mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use simplex::{LinearProgram, LpOutcome};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{enumerate_local_vertices, Behavior, BellFunctional, DeterministicStrategy};
use crate::sources::{source_polytope_vertices, SettingDistribution};

/// Default cap on |E|·|F|.
pub const DEFAULT_BASIS_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Capped,
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Capped => "capped",
        })
    }
}

/// Products g_ij(o,z) = e_i(o|z)·f_j(z).
#[derive(Clone, Debug)]
pub struct ProductVertexBasis<T> {
    pub local_vertices: Vec<DeterministicStrategy>,
    pub source_vertices: Vec<Vec<T>>,
    /// Flat outcome answered by each local vertex at each setting.
    responses: Vec<Vec<usize>>,
}

impl<T: Scalar> ProductVertexBasis<T> {
    pub fn new(local_vertices: Vec<DeterministicStrategy>, source_vertices: Vec<Vec<T>>) -> Self {
        let responses = local_vertices.iter().map(DeterministicStrategy::response_table).collect();
        Self { local_vertices, source_vertices, responses }
    }

    pub fn len(&self) -> usize {
        self.local_vertices.len() * self.source_vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// g_ij(o, z).
    pub fn product(&self, i: usize, j: usize, setting: usize, outcome: usize) -> T {
        if self.responses[i][setting] == outcome {
            self.source_vertices[j][setting].clone()
        } else {
            T::zero()
        }
    }

    fn column(&self, k: usize) -> (usize, usize) {
        (k / self.source_vertices.len(), k % self.source_vertices.len())
    }
}

/// One nonzero γ_ij.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductWeight<T> {
    pub local: usize,
    pub source: usize,
    pub weight: T,
}

#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// B^max when optimal.
    pub value: Option<T>,
    pub weights: Vec<ProductWeight<T>>,
    /// Farkas vector over the rows `[p_obs(z) for z..., normalization]` when
    /// infeasible.
    pub certificate: Option<Vec<T>>,
    pub basis: Option<ProductVertexBasis<T>>,
}

impl<T: Scalar> LpSolution<T> {
    fn without_basis(status: LpStatus) -> Self {
        Self { status, value: None, weights: vec![], certificate: None, basis: None }
    }

    /// Joint statistics Σ γ_ij g_ij(o,z), flattened like a behavior table.
    pub fn joint_statistics(&self) -> Option<Vec<T>> {
        let basis = self.basis.as_ref()?;
        let shape = basis.local_vertices.first()?.shape();
        let mut joint = vec![T::zero(); shape.table_len()];
        for w in &self.weights {
            for z in 0..shape.num_settings() {
                let o = basis.responses[w.local][z];
                let k = shape.entry(z, o);
                joint[k] = joint[k].clone() + w.weight.clone() * basis.source_vertices[w.source][z].clone();
            }
        }
        Some(joint)
    }
}

/// Maximal value of `f` reachable by local models whose per-λ input
/// distribution has every entry ≤ `p_max`, given the observed input
/// distribution `p_obs`.
pub fn max_bell<T: Scalar>(
    f: &BellFunctional<T>,
    p_obs: &SettingDistribution<T>,
    p_max: &T,
) -> Result<LpSolution<T>> {
    max_bell_capped(f, p_obs, p_max, DEFAULT_BASIS_CAP)
}

pub fn max_bell_capped<T: Scalar>(
    f: &BellFunctional<T>,
    p_obs: &SettingDistribution<T>,
    p_max: &T,
    cap: usize,
) -> Result<LpSolution<T>> {
    let shape = f.shape();
    shape.ensure_same(p_obs.shape())?;
    let probs = p_obs.probs();
    if let Some(z) = f.used_settings().into_iter().find(|&z| !probs[z].is_positive_tol()) {
        return Err(Error::InvalidArgument(format!(
            "p_obs vanishes on used setting {:?}",
            shape.setting_tuple(z)
        )));
    }
    let num_settings = shape.num_settings();
    let source_vertices = match source_polytope_vertices(num_settings, p_max) {
        Ok(v) => v,
        Err(Error::OutOfRange(_)) => {
            // empty source polytope: no columns, so y = (1, ..., 1, 0) is a certificate
            let mut certificate = vec![T::one(); num_settings];
            certificate.push(T::zero());
            return Ok(LpSolution {
                certificate: Some(certificate),
                ..LpSolution::without_basis(LpStatus::Infeasible)
            });
        }
        Err(e) => return Err(e),
    };
    let local_vertices = match enumerate_local_vertices(shape) {
        Ok(v) => v,
        Err(Error::ResourceCap { .. }) => return Ok(LpSolution::without_basis(LpStatus::Capped)),
        Err(e) => return Err(e),
    };
    if local_vertices.len().saturating_mul(source_vertices.len()) > cap {
        return Ok(LpSolution::without_basis(LpStatus::Capped));
    }
    let basis = ProductVertexBasis::new(local_vertices, source_vertices);
    let columns = basis.len();

    // objective per column: Σ_z f_j(z)/p_obs(z) · c(o_i(z), z)
    let inverse: Vec<Option<T>> = probs
        .iter()
        .map(|p| p.is_positive_tol().then(|| T::one() / p.clone()))
        .collect();
    let objective: Vec<T> = (0..columns)
        .map(|k| {
            let (i, j) = basis.column(k);
            (0..num_settings).fold(T::zero(), |acc, z| match &inverse[z] {
                Some(inv) if !basis.source_vertices[j][z].is_zero() => {
                    acc + basis.source_vertices[j][z].clone()
                        * inv.clone()
                        * f.deterministic_term(z, basis.responses[i][z])
                }
                _ => acc,
            })
        })
        .collect();

    let mut constraints: Vec<Vec<T>> = (0..num_settings)
        .map(|z| {
            (0..columns)
                .map(|k| basis.source_vertices[basis.column(k).1][z].clone())
                .collect()
        })
        .collect();
    constraints.push(vec![T::one(); columns]);
    let mut rhs = probs.to_vec();
    rhs.push(T::one());

    let lp = LinearProgram::new(constraints, rhs, objective);
    Ok(match lp.solve() {
        LpOutcome::Optimal { x, value } => {
            let weights = x
                .into_iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(k, weight)| {
                    let (local, source) = basis.column(k);
                    ProductWeight { local, source, weight }
                })
                .collect();
            LpSolution {
                status: LpStatus::Optimal,
                value: Some(value),
                weights,
                certificate: None,
                basis: Some(basis),
            }
        }
        LpOutcome::Infeasible { certificate } => LpSolution {
            status: LpStatus::Infeasible,
            value: None,
            weights: vec![],
            certificate: Some(certificate),
            basis: Some(basis),
        },
        LpOutcome::Unbounded => return Err(Error::Unbounded),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<T> {
    pub p_max: T,
    pub status: LpStatus,
    pub value: Option<T>,
}

/// One [`max_bell`] solve per grid point, in parallel. Infeasible and
/// capped points are recorded rather than aborting the sweep.
pub fn sweep_max_bell<T: Scalar>(
    f: &BellFunctional<T>,
    p_obs: &SettingDistribution<T>,
    grid: &[T],
) -> Result<Vec<SweepRow<T>>> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("sweep grid must be sorted ascending".into()));
    }
    grid.par_iter()
        .map(|p_max| {
            let sol = max_bell(f, p_obs, p_max)?;
            Ok(SweepRow { p_max: p_max.clone(), status: sol.status, value: sol.value })
        })
        .collect()
}

/// Result of a local-polytope membership test.
#[derive(Clone, Debug, PartialEq)]
pub enum Membership<T> {
    /// Convex weights over `enumerate_local_vertices(shape)` (nonzero only).
    Feasible { weights: Vec<(usize, T)> },
    /// Farkas vector over rows `(z, o)` for z in the subset (in the given
    /// order, outcomes inner) followed by the normalization row.
    Infeasible { certificate: Vec<T> },
}

impl<T> Membership<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Membership::Feasible { .. })
    }
}

/// Whether some local behavior agrees with `p` on every setting in `subset`.
pub fn local_membership_on_subset<T: Scalar>(p: &Behavior<T>, subset: &[usize]) -> Result<Membership<T>> {
    let shape = p.shape();
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty setting subset".into()));
    }
    if let Some(&z) = subset.iter().find(|&&z| z >= shape.num_settings()) {
        return Err(Error::InvalidArgument(format!("setting index {z} out of range")));
    }
    let vertices = enumerate_local_vertices(shape)?;
    let responses: Vec<Vec<usize>> = vertices.iter().map(DeterministicStrategy::response_table).collect();
    let outcomes = shape.num_outcomes();
    let mut constraints = Vec::with_capacity(subset.len() * outcomes + 1);
    let mut rhs = Vec::with_capacity(subset.len() * outcomes + 1);
    for &z in subset {
        for o in 0..outcomes {
            constraints.push(
                responses
                    .iter()
                    .map(|r| if r[z] == o { T::one() } else { T::zero() })
                    .collect(),
            );
            rhs.push(p.prob(z, o).clone());
        }
    }
    constraints.push(vec![T::one(); vertices.len()]);
    rhs.push(T::one());
    let lp = LinearProgram::new(constraints, rhs, vec![]);
    Ok(match lp.solve() {
        LpOutcome::Optimal { x, .. } => Membership::Feasible {
            weights: x.into_iter().enumerate().filter(|(_, w)| !w.is_zero()).collect(),
        },
        LpOutcome::Infeasible { certificate } => Membership::Infeasible { certificate },
        LpOutcome::Unbounded => return Err(Error::Unbounded),
    })
}
