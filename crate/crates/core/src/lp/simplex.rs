//! Dense two-phase primal simplex over any [`Scalar`].
//!
//! Solves `max cᵀx  s.t.  Ax = b, x ≥ 0`. Pivoting follows Bland's rule
//! (lowest-index entering column, lowest-index leaving basic variable on
//! ratio ties), which terminates on degenerate problems. With [`Rational`]
//! the result is exact; with `f64` comparisons use
//! [`F64_TOLERANCE`](crate::scalar::F64_TOLERANCE).
//!
//! [`Rational`]: crate::scalar::Rational

use crate::scalar::Scalar;

/// Equality-form linear program.
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    /// Row-major constraint matrix, one `Vec` per equality.
    pub constraints: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    /// Objective to maximize; empty means pure feasibility.
    pub objective: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    /// Farkas certificate `y` with `yᵀA ≤ 0` componentwise and `yᵀb > 0`.
    Infeasible { certificate: Vec<T> },
    Unbounded,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(constraints: Vec<Vec<T>>, rhs: Vec<T>, objective: Vec<T>) -> Self {
        Self { constraints, rhs, objective }
    }

    pub fn num_vars(&self) -> usize {
        self.constraints.first().map_or(self.objective.len(), Vec::len)
    }

    pub fn solve(&self) -> LpOutcome<T> {
        Tableau::build(self).run(self)
    }

    /// Checks a Farkas certificate against this system.
    pub fn certifies_infeasibility(&self, y: &[T]) -> bool {
        if y.len() != self.constraints.len() {
            return false;
        }
        let yb = y.iter().zip(&self.rhs).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
        if !yb.is_positive_tol() {
            return false;
        }
        (0..self.num_vars()).all(|j| {
            let col = y
                .iter()
                .zip(&self.constraints)
                .fold(T::zero(), |acc, (yi, row)| acc + yi.clone() * row[j].clone());
            !col.is_positive_tol()
        })
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    /// Reduced-cost row; last entry holds −(objective value).
    cost: Vec<T>,
    basis: Vec<usize>,
    /// ±1 per original row: rows with negative rhs were negated.
    flips: Vec<bool>,
    n: usize,
    m: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let m = lp.constraints.len();
        let n = lp.num_vars();
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        let mut flips = Vec::with_capacity(m);
        for (i, (row, b)) in lp.constraints.iter().zip(&lp.rhs).enumerate() {
            assert_eq!(row.len(), n, "ragged constraint matrix");
            let flip = *b < T::zero();
            let mut r = Vec::with_capacity(width);
            for a in row {
                r.push(if flip { -a.clone() } else { a.clone() });
            }
            for k in 0..m {
                r.push(if k == i { T::one() } else { T::zero() });
            }
            r.push(if flip { -b.clone() } else { b.clone() });
            rows.push(r);
            flips.push(flip);
        }
        // phase 1: maximize −Σ artificials; reduced cost of x_j is Σ_i A_ij
        let mut cost = vec![T::zero(); width];
        for r in &rows {
            for (j, c) in cost.iter_mut().enumerate() {
                if j < n || j == width - 1 {
                    *c = c.clone() + r[j].clone();
                }
            }
        }
        Self {
            rows,
            cost,
            basis: (n..n + m).collect(),
            flips,
            n,
            m,
        }
    }

    fn width(&self) -> usize {
        self.n + self.m + 1
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let w = self.width();
        let p = self.rows[r][col].clone();
        for j in 0..w {
            let v = self.rows[r][j].clone();
            if !v.is_zero() {
                self.rows[r][j] = v / p.clone();
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[col].clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..w {
                if !pivot_row[j].is_zero() {
                    row[j] = row[j].clone() - factor.clone() * pivot_row[j].clone();
                }
            }
            row[col] = T::zero();
        }
        let factor = self.cost[col].clone();
        if !factor.is_zero() {
            for j in 0..w {
                if !pivot_row[j].is_zero() {
                    self.cost[j] = self.cost[j].clone() - factor.clone() * pivot_row[j].clone();
                }
            }
            self.cost[col] = T::zero();
        }
        self.basis[r] = col;
    }

    /// Bland's-rule iterations over columns `< limit`. Returns `false` if unbounded.
    fn iterate(&mut self, limit: usize) -> bool {
        let rhs = self.width() - 1;
        loop {
            let Some(col) = (0..limit).find(|&j| self.cost[j].is_positive_tol()) else {
                return true;
            };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive_tol() {
                    continue;
                }
                let ratio = row[rhs].clone() / row[col].clone();
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < best.clone() - T::tolerance()
                            || (ratio.approx_eq(best) && self.basis[i] < self.basis[*k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }

    fn run(mut self, lp: &LinearProgram<T>) -> LpOutcome<T> {
        let (n, m) = (self.n, self.m);
        let rhs = self.width() - 1;
        self.iterate(n + m);

        // phase-1 optimum −Σ artificials, stored as −value in the cost row
        let infeasibility = self.cost[rhs].clone();
        if infeasibility.is_positive_tol() {
            // y = c_B B⁻¹ with c = −1 on artificials; the artificial block of
            // the tableau is B⁻¹. The certificate is −y in original row signs.
            let mut certificate = vec![T::zero(); m];
            for (row, &b) in self.rows.iter().zip(&self.basis) {
                if b >= n {
                    for (k, cert) in certificate.iter_mut().enumerate() {
                        *cert = cert.clone() + row[n + k].clone();
                    }
                }
            }
            for (k, cert) in certificate.iter_mut().enumerate() {
                if self.flips[k] {
                    *cert = -cert.clone();
                }
            }
            debug_assert!(lp.certifies_infeasibility(&certificate));
            return LpOutcome::Infeasible { certificate };
        }

        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= n {
                match (0..n).find(|&j| !self.rows[r][j].is_zero_tol()) {
                    Some(col) => self.pivot(r, col),
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }

        // phase 2 reduced costs
        let objective: Vec<T> = if lp.objective.is_empty() {
            vec![T::zero(); n]
        } else {
            lp.objective.clone()
        };
        let w = self.width();
        let mut cost = vec![T::zero(); w];
        cost[..n].clone_from_slice(&objective);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = objective[b].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..w {
                if j < n || j == rhs {
                    cost[j] = cost[j].clone() - cb.clone() * row[j].clone();
                }
            }
        }
        self.cost = cost;
        if !self.iterate(n) {
            return LpOutcome::Unbounded;
        }

        let mut x = vec![T::zero(); n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            x[b] = row[rhs].clone();
        }
        let value = objective
            .iter()
            .zip(&x)
            .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
        LpOutcome::Optimal { x, value }
    }
}
