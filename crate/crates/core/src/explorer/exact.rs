//! Full-information Frank–Wolfe for `d*_rho = argmax_{d in D_eta} U_rho(d)`.

use crate::error::{Error, Result};
use crate::mdp::{MdpModel, Policy};
use crate::objective::RhoObjective;
use crate::occupancy::occupancy_of_policy;
use crate::polytope::{build_polytope, feasibility_check, lp_maximize, OccupancyPolytope};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrankWolfeOptions {
    pub max_iterations: usize,
    /// Stop once the duality gap falls to this level.
    pub gap_tolerance: f64,
}

impl Default for FrankWolfeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            gap_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// Iteration cap reached before the gap tolerance; the iterate is still feasible.
    IterationCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution<T> {
    pub occupancy: Vec<T>,
    pub value: T,
    /// Last Frank–Wolfe gap `<grad U(d), v - d>`, an upper bound on `U(d*) - U(d)`.
    /// May be `+inf` when the gradient itself overflows.
    pub gap: T,
    /// Gap divided by the largest gradient entry; always finite.
    pub scaled_gap: T,
    pub iterations: usize,
    pub status: SolveStatus,
}

/// Starting point: the uniform-policy occupancy when it lies in `D_eta`,
/// otherwise the max-min-coverage vertex of the margin LP.
pub fn initial_point<T: Scalar>(
    model: &MdpModel<T>,
    polytope: &OccupancyPolytope<T>,
) -> Result<Vec<T>> {
    let uniform = occupancy_of_policy(
        model,
        &Policy::uniform(model.num_states(), model.num_actions()),
    )?;
    if polytope.contains(uniform.values()) {
        return Ok(uniform.into_vec());
    }
    let report = feasibility_check(polytope)?;
    if !report.feasible || report.margin < polytope.lower_bound() {
        return Err(Error::Infeasible);
    }
    Ok(report.margin_point)
}

/// Frank–Wolfe with open-loop steps `gamma_j = 2 / (j + 2)`, `j = 1, 2, ...`.
///
/// Starting at `j = 1` keeps a positive share of the interior starting point in
/// every iterate, so the gradient stays finite even when `eta = 0`. Linear
/// subproblems use the max-normalized gradient.
pub fn exact_solve<T: Scalar>(
    model: &MdpModel<T>,
    objective: &RhoObjective<T>,
    eta: T,
    options: FrankWolfeOptions,
) -> Result<ExactSolution<T>> {
    let polytope = build_polytope(model, eta)?;
    let mut d = initial_point(model, &polytope)?;
    frank_wolfe_from(&polytope, objective, &mut d, options)
}

pub(crate) fn frank_wolfe_from<T: Scalar>(
    polytope: &OccupancyPolytope<T>,
    objective: &RhoObjective<T>,
    d: &mut [T],
    options: FrankWolfeOptions,
) -> Result<ExactSolution<T>> {
    let tolerance: T = lit(options.gap_tolerance);
    let two: T = lit(2.0);
    let mut scaled_gap;
    let mut gap;
    let mut status = SolveStatus::IterationCap;

    let mut j = 0usize;
    loop {
        let grad = objective.log_gradient_weights(d)?;
        let vertex = lp_maximize(polytope, &grad.weights)?.into_point()?;
        scaled_gap = grad
            .weights
            .iter()
            .zip(vertex.iter().zip(d.iter()))
            .map(|(&w, (&v, &x))| w * (v - x))
            .sum::<T>()
            .max(T::zero());
        gap = scaled_gap * grad.log_scale.exp();
        if gap <= tolerance {
            status = SolveStatus::Converged;
            break;
        }
        if j == options.max_iterations {
            break;
        }
        j += 1;
        let step = two / (T::from_usize(j).expect("iteration") + two);
        for (x, &v) in d.iter_mut().zip(&vertex) {
            *x = (T::one() - step) * *x + step * v;
        }
    }
    let value = objective.value(d)?;
    Ok(ExactSolution {
        occupancy: d.to_vec(),
        value,
        gap,
        scaled_gap,
        iterations: j,
        status,
    })
}
