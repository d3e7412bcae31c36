//! Linear optimization over the restricted occupancy polytope
//!
//! ```text
//! D_eta = { d >= 2 eta, sum d = 1, sum_a d[s'][a] = sum_{s,a} P(s'|s,a) d[s][a] for all s' }
//! ```
//!
//! Variables are shifted, `d = 2 eta + y` with `y >= 0`, before being handed to
//! the simplex. All `S` flow rows are kept even though one is implied by the
//! others and normalization; phase one drops the dependent row.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::mdp::{validate_mdp, MdpModel};
use crate::objective::CoverageWeights;
use crate::scalar::{lit, Field, Scalar};
use crate::simplex::{self, Constraint, LinearProgram, LpStatus, Relation};

/// Constraint system of `D_eta` for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyPolytope<F> {
    num_states: usize,
    num_actions: usize,
    eta: F,
    /// `(S + 1) x SA` row-major: `S` flow rows, then normalization.
    equalities: Vec<F>,
    rhs: Vec<F>,
}

/// Optimal vertex of an LP over the polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<F> {
    pub status: LpStatus,
    /// Occupancy vector; empty unless optimal.
    pub point: Vec<F>,
    pub objective_value: F,
}

impl<F: Field> LpSolution<F> {
    /// The optimal point, or [`Error::Infeasible`] / [`Error::Unbounded`].
    pub fn into_point(self) -> Result<Vec<F>> {
        match self.status {
            LpStatus::Optimal => Ok(self.point),
            LpStatus::Infeasible => Err(Error::Infeasible),
            LpStatus::Unbounded => Err(Error::Unbounded),
        }
    }
}

/// Builds `D_eta` for a validated model; `eta = 0` gives the full polytope.
pub fn build_polytope<T: Scalar>(model: &MdpModel<T>, eta: T) -> Result<OccupancyPolytope<T>> {
    check_eta(eta)?;
    validate_mdp(model).into_result()?;
    let kernel: Vec<T> = model.kernel().to_vec();
    Ok(assemble(
        model.num_states(),
        model.num_actions(),
        &kernel,
        eta,
    ))
}

/// Exact rational copy of `D_eta`.
///
/// Kernel entries are converted exactly; the largest entry of each row is then
/// set to one minus the rest, so rows are exactly stochastic and the dropped
/// flow row really is redundant.
pub fn build_exact_polytope<T: Scalar>(
    model: &MdpModel<T>,
    eta: BigRational,
) -> Result<OccupancyPolytope<BigRational>> {
    if eta < BigRational::zero() || eta >= BigRational::new(1.into(), 2.into()) {
        return Err(Error::Parameter("eta must lie in [0, 1/2)".into()));
    }
    validate_mdp(model).into_result()?;
    let ns = model.num_states();
    let mut kernel = Vec::with_capacity(model.kernel().len());
    for row in model.kernel().chunks(ns) {
        let mut exact: Vec<BigRational> = row
            .iter()
            .map(|&p| p.to_exact().expect("finite probability"))
            .collect();
        let largest = (0..ns)
            .max_by(|&i, &j| row[i].partial_cmp(&row[j]).expect("finite"))
            .expect("nonempty row");
        let rest = exact
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != largest)
            .fold(BigRational::zero(), |acc, (_, v)| acc + v);
        exact[largest] = BigRational::one() - rest;
        kernel.extend(exact);
    }
    Ok(assemble(ns, model.num_actions(), &kernel, eta))
}

fn check_eta<T: Scalar>(eta: T) -> Result<()> {
    if !(eta >= T::zero() && eta < lit(0.5)) {
        return Err(Error::Parameter(format!(
            "eta = {eta} must lie in [0, 1/2)"
        )));
    }
    Ok(())
}

fn assemble<F: Field>(ns: usize, na: usize, kernel: &[F], eta: F) -> OccupancyPolytope<F> {
    let pairs = ns * na;
    let mut equalities = vec![F::zero(); (ns + 1) * pairs];
    for next in 0..ns {
        let row = &mut equalities[next * pairs..(next + 1) * pairs];
        for s in 0..ns {
            for a in 0..na {
                let p = kernel[(s * na + a) * ns + next].clone();
                let mut coeff = F::zero() - p;
                if s == next {
                    coeff = coeff + F::one();
                }
                row[s * na + a] = coeff;
            }
        }
    }
    for v in &mut equalities[ns * pairs..] {
        *v = F::one();
    }
    let mut rhs = vec![F::zero(); ns + 1];
    rhs[ns] = F::one();
    OccupancyPolytope {
        num_states: ns,
        num_actions: na,
        eta,
        equalities,
        rhs,
    }
}

impl<F: Field> OccupancyPolytope<F> {
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_pairs(&self) -> usize {
        self.num_states * self.num_actions
    }

    pub fn eta(&self) -> &F {
        &self.eta
    }

    /// The per-coordinate lower bound `2 eta`.
    pub fn lower_bound(&self) -> F {
        self.eta.clone() + self.eta.clone()
    }

    /// Number of equality rows, always `S + 1`.
    pub fn num_equalities(&self) -> usize {
        self.rhs.len()
    }

    fn equality_row(&self, i: usize) -> &[F] {
        let pairs = self.num_pairs();
        &self.equalities[i * pairs..(i + 1) * pairs]
    }

    /// Equality rows in the shifted variables `y = d - 2 eta`.
    fn shifted_equalities(&self) -> Vec<Constraint<F>> {
        let lb = self.lower_bound();
        (0..self.num_equalities())
            .map(|i| {
                let coeffs = self.equality_row(i).to_vec();
                let offset = coeffs
                    .iter()
                    .fold(F::zero(), |acc, c| acc + c.clone() * lb.clone());
                Constraint {
                    coeffs,
                    relation: Relation::Eq,
                    rhs: self.rhs[i].clone() - offset,
                }
            })
            .collect()
    }

    /// Largest violation of any equality or bound at `d`.
    pub fn max_violation(&self, d: &[F]) -> F {
        let mut worst = F::zero();
        let lb = self.lower_bound();
        for v in d {
            let gap = lb.clone() - v.clone();
            if gap > worst {
                worst = gap;
            }
        }
        for i in 0..self.num_equalities() {
            let lhs = self
                .equality_row(i)
                .iter()
                .zip(d)
                .fold(F::zero(), |acc, (c, x)| acc + c.clone() * x.clone());
            let diff = lhs - self.rhs[i].clone();
            let mag = if diff < F::zero() {
                F::zero() - diff
            } else {
                diff
            };
            if mag > worst {
                worst = mag;
            }
        }
        worst
    }

    pub fn contains(&self, d: &[F]) -> bool {
        d.len() == self.num_pairs() && self.max_violation(d) <= F::feasibility_tolerance()
    }
}

fn largest_magnitude<F: Field>(xs: &[F]) -> F {
    xs.iter().fold(F::zero(), |acc, x| {
        let m = if *x < F::zero() {
            F::zero() - x.clone()
        } else {
            x.clone()
        };
        if m > acc {
            m
        } else {
            acc
        }
    })
}

/// `argmax <objective, d>` over `D_eta`.
///
/// The objective is divided by its largest magnitude before solving, so the
/// returned vertex is the same for any positive rescaling of `objective`. The
/// reported value is for the unscaled objective.
pub fn lp_maximize<F: Field>(
    polytope: &OccupancyPolytope<F>,
    objective: &[F],
) -> Result<LpSolution<F>> {
    let pairs = polytope.num_pairs();
    if objective.len() != pairs {
        return Err(Error::Dimension {
            what: "lp objective",
            expected: pairs,
            found: objective.len(),
        });
    }
    let scale = largest_magnitude(objective);
    let scaled: Vec<F> = if scale.is_zero() {
        objective.to_vec()
    } else {
        objective
            .iter()
            .map(|c| c.clone() / scale.clone())
            .collect()
    };
    let lp = LinearProgram {
        objective: scaled,
        constraints: polytope.shifted_equalities(),
    };
    let outcome = simplex::maximize(&lp)?;
    if outcome.status != LpStatus::Optimal {
        return Ok(LpSolution {
            status: outcome.status,
            point: Vec::new(),
            objective_value: F::zero(),
        });
    }
    let lb = polytope.lower_bound();
    let point: Vec<F> = outcome.x.into_iter().map(|y| y + lb.clone()).collect();
    let objective_value = objective
        .iter()
        .zip(&point)
        .fold(F::zero(), |acc, (c, x)| acc + c.clone() * x.clone());
    Ok(LpSolution {
        status: LpStatus::Optimal,
        point,
        objective_value,
    })
}

/// Optimizer of `min_{d in D_eta} max mu / d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxSolution<F> {
    pub occupancy: Vec<F>,
    /// `m* = max_d min mu-scaled coverage`; the minimax ratio is `1 / m*`.
    pub m_star: F,
}

impl<F: Field> MinimaxSolution<F> {
    /// `1 / m*`, the smallest achievable worst-case ratio.
    pub fn minimax_value(&self) -> F {
        F::one() / self.m_star.clone()
    }
}

/// Minimax coverage for a model: builds `D_eta` and calls [`solve_minimax`].
pub fn minimax_occupancy<T: Scalar>(
    model: &MdpModel<T>,
    weights: &CoverageWeights<T>,
    eta: T,
) -> Result<MinimaxSolution<T>> {
    solve_minimax(&build_polytope(model, eta)?, weights.values())
}

/// Solves `max m` over `d in D_eta`, `d >= m mu`.
pub fn solve_minimax<F: Field>(
    polytope: &OccupancyPolytope<F>,
    mu: &[F],
) -> Result<MinimaxSolution<F>> {
    let pairs = polytope.num_pairs();
    if mu.len() != pairs {
        return Err(Error::Dimension {
            what: "coverage weights",
            expected: pairs,
            found: mu.len(),
        });
    }
    let lb = polytope.lower_bound();
    // variables: y (pairs), m
    let mut constraints: Vec<Constraint<F>> = polytope
        .shifted_equalities()
        .into_iter()
        .map(|mut c| {
            c.coeffs.push(F::zero());
            c
        })
        .collect();
    for (i, w) in mu.iter().enumerate() {
        let mut coeffs = vec![F::zero(); pairs + 1];
        coeffs[i] = F::one();
        coeffs[pairs] = F::zero() - w.clone();
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Ge,
            rhs: F::zero() - lb.clone(),
        });
    }
    let mut objective = vec![F::zero(); pairs + 1];
    objective[pairs] = F::one();
    let outcome = simplex::maximize(&LinearProgram {
        objective,
        constraints,
    })?;
    match outcome.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible),
        LpStatus::Unbounded => return Err(Error::Unbounded),
    }
    let m_star = outcome.x[pairs].clone();
    if !(m_star > F::zero()) {
        return Err(Error::Infeasible);
    }
    let occupancy = outcome.x[..pairs]
        .iter()
        .map(|y| y.clone() + lb.clone())
        .collect();
    Ok(MinimaxSolution { occupancy, m_star })
}

/// Result of [`feasibility_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility<F> {
    /// Whether `D_eta` is nonempty.
    pub feasible: bool,
    /// `max_{d in D} min_{s,a} d[s][a]`.
    pub margin: F,
    /// A point attaining the margin.
    pub margin_point: Vec<F>,
}

/// Phase-one feasibility of `D_eta` plus the largest uniform lower bound any
/// occupancy in the full polytope achieves.
///
/// The margin LP writes `d = m 1 + z` with `z >= 0` and maximizes `m`; it is
/// deliberately a different formulation from [`solve_minimax`].
pub fn feasibility_check<F: Field>(polytope: &OccupancyPolytope<F>) -> Result<Feasibility<F>> {
    let pairs = polytope.num_pairs();
    let phase_one = simplex::maximize(&LinearProgram {
        objective: vec![F::zero(); pairs],
        constraints: polytope.shifted_equalities(),
    })?;
    let feasible = phase_one.status == LpStatus::Optimal;

    // variables: z (pairs), m
    let constraints: Vec<Constraint<F>> = (0..polytope.num_equalities())
        .map(|i| {
            let row = polytope.equality_row(i);
            let row_sum = row.iter().fold(F::zero(), |acc, c| acc + c.clone());
            let mut coeffs = row.to_vec();
            coeffs.push(row_sum);
            Constraint {
                coeffs,
                relation: Relation::Eq,
                rhs: polytope.rhs[i].clone(),
            }
        })
        .collect();
    let mut objective = vec![F::zero(); pairs + 1];
    objective[pairs] = F::one();
    let outcome = simplex::maximize(&LinearProgram {
        objective,
        constraints,
    })?;
    if outcome.status != LpStatus::Optimal {
        return Err(Error::Infeasible);
    }
    let margin = outcome.x[pairs].clone();
    let margin_point = outcome.x[..pairs]
        .iter()
        .map(|z| z.clone() + margin.clone())
        .collect();
    Ok(Feasibility {
        feasible,
        margin,
        margin_point,
    })
}

/// Default restriction level: `2 eta` is half the feasibility margin, capped so
/// that `eta <= 1 / (4 S A)`.
pub fn auto_eta<T: Scalar>(model: &MdpModel<T>) -> Result<T> {
    let full = build_polytope(model, T::zero())?;
    let report = feasibility_check(&full)?;
    let pairs = T::from_usize(model.num_pairs()).expect("pair count");
    let cap = T::one() / (lit::<T>(4.0) * pairs);
    Ok((report.margin / lit(4.0)).min(cap))
}
