//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Solves `max c^T x` subject to rows `a_i^T x {<=, =, >=} b_i` and `x >= 0`.
//! Generic over [`Field`], so the same code runs in floating point and in
//! exact rational arithmetic. Problems here have at most a few dozen rows;
//! there is no attempt at sparsity or numerical refactorization.

use crate::error::{Error, Result};
use crate::scalar::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<F> {
    pub coeffs: Vec<F>,
    pub relation: Relation,
    pub rhs: F,
}

/// `max objective^T x` over `x >= 0` and the listed constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<F> {
    pub objective: Vec<F>,
    pub constraints: Vec<Constraint<F>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome<F> {
    pub status: LpStatus,
    /// Primal point; empty unless optimal.
    pub x: Vec<F>,
    pub objective_value: F,
    /// Basic variable of each surviving row (indices past `x.len()` are slacks).
    pub basis: Vec<usize>,
    pub pivots: usize,
}

/// Default pivot cap: generous for problems with tens of rows.
pub fn default_pivot_limit(rows: usize, cols: usize) -> usize {
    1000 + 50 * (rows + cols)
}

struct Tableau<F> {
    /// `rows x (cols + 1)`, right-hand side in the last column.
    rows: Vec<Vec<F>>,
    basis: Vec<usize>,
    cols: usize,
    /// Reduced costs `c_j - z_j` of the current phase, plus `-z` in the last slot.
    costs: Vec<F>,
    /// Columns barred from entering (artificials during phase two).
    blocked: Vec<bool>,
    pivots: usize,
}

impl<F: Field> Tableau<F> {
    fn rhs(&self, i: usize) -> &F {
        &self.rows[i][self.cols]
    }

    fn set_costs(&mut self, c: &[F]) {
        let mut costs: Vec<F> = c.to_vec();
        costs.push(F::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (dst, v) in costs.iter_mut().zip(&self.rows[i]) {
                *dst = dst.clone() - cb.clone() * v.clone();
            }
        }
        self.costs = costs;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        for v in &mut self.rows[row] {
            *v = v.clone() / pivot.clone();
        }
        self.rows[row][col] = F::one();
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col].clone();
            if factor.is_zero() {
                continue;
            }
            for (dst, v) in r.iter_mut().zip(&pivot_row) {
                *dst = dst.clone() - factor.clone() * v.clone();
            }
            r[col] = F::zero();
        }
        let factor = self.costs[col].clone();
        if !factor.is_zero() {
            for (dst, v) in self.costs.iter_mut().zip(&pivot_row) {
                *dst = dst.clone() - factor.clone() * v.clone();
            }
            self.costs[col] = F::zero();
        }
        let tol = F::feasibility_tolerance();
        let cols = self.cols;
        for r in &mut self.rows {
            if r[cols] < F::zero() && r[cols] > -tol.clone() {
                r[cols] = F::zero();
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Runs Bland's rule until optimal or unbounded.
    fn optimize(&mut self, limit: usize, phase: u8) -> Result<LpStatus> {
        let tol = F::pivot_tolerance();
        loop {
            let entering = (0..self.cols).find(|&j| !self.blocked[j] && self.costs[j] > tol);
            let Some(col) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let mut leaving: Option<(usize, F)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if *a <= tol {
                    continue;
                }
                let ratio = self.rhs(i).clone() / a.clone();
                let better = match &leaving {
                    None => true,
                    Some((best_row, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*best_row])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                return Ok(LpStatus::Unbounded);
            };
            if self.pivots >= limit {
                return Err(Error::SolverStall {
                    iterations: self.pivots,
                    phase,
                });
            }
            self.pivot(row, col);
        }
    }
}

fn negate<F: Field>(x: &F) -> F {
    F::zero() - x.clone()
}

/// Solves `lp` with the default pivot limit.
pub fn maximize<F: Field>(lp: &LinearProgram<F>) -> Result<SimplexOutcome<F>> {
    let limit = default_pivot_limit(lp.constraints.len(), lp.objective.len());
    maximize_with_limit(lp, limit)
}

pub fn maximize_with_limit<F: Field>(
    lp: &LinearProgram<F>,
    limit: usize,
) -> Result<SimplexOutcome<F>> {
    let n = lp.objective.len();
    for c in &lp.constraints {
        if c.coeffs.len() != n {
            return Err(Error::Dimension {
                what: "constraint row",
                expected: n,
                found: c.coeffs.len(),
            });
        }
    }

    // Normalize to nonnegative right-hand sides.
    let rows: Vec<(Vec<F>, Relation, F)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < F::zero() {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (
                    c.coeffs.iter().map(negate).collect(),
                    flipped,
                    negate(&c.rhs),
                )
            } else {
                (c.coeffs.clone(), c.relation, c.rhs.clone())
            }
        })
        .collect();

    let num_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let num_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + num_slack + num_art;
    let art_start = n + num_slack;

    let mut tableau_rows = Vec::with_capacity(rows.len());
    let mut basis = Vec::with_capacity(rows.len());
    let (mut next_slack, mut next_art) = (n, art_start);
    for (coeffs, relation, rhs) in rows {
        let mut row = vec![F::zero(); cols + 1];
        for (dst, v) in row.iter_mut().zip(coeffs) {
            *dst = v;
        }
        row[cols] = rhs;
        match relation {
            Relation::Le => {
                row[next_slack] = F::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = negate(&F::one());
                next_slack += 1;
                row[next_art] = F::one();
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = F::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        tableau_rows.push(row);
    }

    let mut t = Tableau {
        rows: tableau_rows,
        basis,
        cols,
        costs: Vec::new(),
        blocked: vec![false; cols],
        pivots: 0,
    };

    if num_art > 0 {
        let mut phase_one = vec![F::zero(); cols];
        for c in &mut phase_one[art_start..] {
            *c = negate(&F::one());
        }
        t.set_costs(&phase_one);
        t.optimize(limit, 1)?;
        let infeasibility = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art_start)
            .fold(F::zero(), |acc, (i, _)| acc + t.rhs(i).clone());
        if infeasibility > F::feasibility_tolerance() {
            return Ok(SimplexOutcome {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective_value: F::zero(),
                basis: t.basis,
                pivots: t.pivots,
            });
        }
        // Drive remaining zero-level artificials out; rows where that is
        // impossible are linearly dependent and dropped.
        let tol = F::pivot_tolerance();
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] < art_start {
                i += 1;
                continue;
            }
            let replacement = (0..art_start).find(|&j| {
                let a = &t.rows[i][j];
                *a > tol || *a < negate(&tol)
            });
            match replacement {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        }
        for b in &mut t.blocked[art_start..] {
            *b = true;
        }
    }

    let mut costs = lp.objective.clone();
    costs.resize(cols, F::zero());
    t.set_costs(&costs);
    let status = t.optimize(limit, 2)?;
    if status == LpStatus::Unbounded {
        return Ok(SimplexOutcome {
            status,
            x: Vec::new(),
            objective_value: F::zero(),
            basis: t.basis,
            pivots: t.pivots,
        });
    }

    let mut x = vec![F::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[i][cols].clone();
        }
    }
    let objective_value = lp
        .objective
        .iter()
        .zip(&x)
        .fold(F::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
    Ok(SimplexOutcome {
        status: LpStatus::Optimal,
        x,
        objective_value,
        basis: t.basis,
        pivots: t.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn row<F: Clone>(coeffs: &[F], relation: Relation, rhs: F) -> Constraint<F> {
        Constraint {
            coeffs: coeffs.to_vec(),
            relation,
            rhs,
        }
    }

    #[test]
    fn textbook_le_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let lp: LinearProgram<f64> = LinearProgram {
            objective: vec![3.0, 5.0],
            constraints: vec![
                row(&[1.0, 0.0], Relation::Le, 4.0),
                row(&[0.0, 2.0], Relation::Le, 12.0),
                row(&[3.0, 2.0], Relation::Le, 18.0),
            ],
        };
        let out = maximize(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.x[0] - 2.0).abs() < 1e-12 && (out.x[1] - 6.0).abs() < 1e-12);
        assert!((out.objective_value - 36.0).abs() < 1e-12);
    }

    #[test]
    fn exact_rational_with_equality_and_ge() {
        // max x + y s.t. x + 2y = 2, x >= 1/2  -> x = 2, y = 0, value 2
        let lp = LinearProgram {
            objective: vec![ratio(1, 1), ratio(1, 1)],
            constraints: vec![
                row(&[ratio(1, 1), ratio(2, 1)], Relation::Eq, ratio(2, 1)),
                row(&[ratio(1, 1), ratio(0, 1)], Relation::Ge, ratio(1, 2)),
            ],
        };
        let out = maximize(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.x, vec![ratio(2, 1), ratio(0, 1)]);
        assert_eq!(out.objective_value, ratio(2, 1));
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = LinearProgram {
            objective: vec![1.0],
            constraints: vec![
                row(&[1.0], Relation::Ge, 2.0),
                row(&[1.0], Relation::Le, 1.0),
            ],
        };
        assert_eq!(maximize(&infeasible).unwrap().status, LpStatus::Infeasible);
        let unbounded = LinearProgram {
            objective: vec![1.0, 0.0],
            constraints: vec![row(&[1.0, -1.0], Relation::Le, 1.0)],
        };
        assert_eq!(maximize(&unbounded).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let lp: LinearProgram<BigRational> = LinearProgram {
            objective: vec![ratio(1, 1), ratio(3, 1)],
            constraints: vec![
                row(&[ratio(1, 1), ratio(1, 1)], Relation::Eq, ratio(1, 1)),
                row(&[ratio(2, 1), ratio(2, 1)], Relation::Eq, ratio(2, 1)),
            ],
        };
        let out = maximize(&lp).unwrap();
        assert_eq!(out.basis.len(), 1);
        assert_eq!(out.x, vec![ratio(0, 1), ratio(1, 1)]);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x <= -1  <=> x >= 1; max -x -> x = 1
        let lp = LinearProgram {
            objective: vec![-1.0],
            constraints: vec![row(&[-1.0], Relation::Le, -1.0)],
        };
        let out = maximize(&lp).unwrap();
        assert_eq!(out.x, vec![1.0]);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Classic degenerate instance that cycles under Dantzig's rule.
        let lp: LinearProgram<f64> = LinearProgram {
            objective: vec![0.75, -150.0, 0.02, -6.0],
            constraints: vec![
                row(&[0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0),
                row(&[0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0),
                row(&[0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0),
            ],
        };
        let out = maximize(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective_value - 0.05).abs() < 1e-12);
    }

    #[test]
    fn pivot_limit_reports_stall() {
        let lp = LinearProgram {
            objective: vec![3.0, 5.0],
            constraints: vec![
                row(&[1.0, 0.0], Relation::Le, 4.0),
                row(&[0.0, 2.0], Relation::Le, 12.0),
                row(&[3.0, 2.0], Relation::Le, 18.0),
            ],
        };
        assert!(matches!(
            maximize_with_limit(&lp, 1),
            Err(Error::SolverStall { phase: 2, .. })
        ));
    }
}
