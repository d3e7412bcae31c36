//! Episodic coverage exploration against a simulated environment.
//!
//! Each episode solves one linear program over `D_eta` with the current
//! gradient weights, converts the optimal occupancy into a policy, and runs it
//! for `tau_k` steps. The environment is never reset between episodes.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::explorer::schedule::{make_schedule, EpisodeSchedule};
use crate::mdp::{Environment, MdpModel, Policy};
use crate::objective::{max_ratio, CoverageWeights, RhoObjective};
use crate::occupancy::{policy_of_occupancy, VisitCounts};
use crate::polytope::{build_polytope, feasibility_check, lp_maximize};
use crate::scalar::{from_count, Scalar};

/// Cold-start floor for visit counts.
pub const DEFAULT_EPSILON_COLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationConfig<T> {
    pub rho: T,
    pub weights: CoverageWeights<T>,
    pub eta: T,
    pub tau1: u64,
    pub episodes: u64,
    /// Counts below this are raised to it before forming gradients.
    pub epsilon_cold: T,
    pub seed: u64,
    pub initial_state: usize,
}

impl<T: Scalar> ExplorationConfig<T> {
    pub fn objective(&self) -> Result<RhoObjective<T>> {
        RhoObjective::new(self.rho, self.weights.clone())
    }
}

/// Everything recorded at the end of episode `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord<T> {
    pub k: u64,
    /// `t_k`, the first step of the episode.
    pub start: u64,
    pub length: u64,
    pub beta: T,
    /// Steps recorded so far, `t_{k+1} - 1`.
    pub steps: u64,
    pub counts: Vec<u64>,
    /// `counts / steps`.
    pub d_hat: Vec<T>,
    /// `U_rho` at the count-floored estimate `max(T, eps) / steps`.
    pub u_hat: T,
    pub max_ratio: T,
    /// Occupancy returned by the episode's linear program.
    pub target: Vec<T>,
    /// Value of the episode LP under the max-normalized gradient weights.
    pub lp_value: T,
    pub policy: Policy<T>,
    pub wall_ms: f64,
}

impl<T: PartialEq> EpisodeRecord<T> {
    /// Equality ignoring wall-clock timing.
    pub fn same_outcome(&self, other: &Self) -> bool
    where
        T: Scalar,
    {
        self.k == other.k
            && self.steps == other.steps
            && self.counts == other.counts
            && self.d_hat == other.d_hat
            && self.u_hat == other.u_hat
            && self.target == other.target
            && self.policy == other.policy
            && self.lp_value == other.lp_value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationTrace<T> {
    pub num_states: usize,
    pub num_actions: usize,
    pub schedule: EpisodeSchedule,
    pub records: Vec<EpisodeRecord<T>>,
    /// First episode after which every `d_hat` entry is at least `eta`.
    pub k_delta: Option<u64>,
    pub epsilon_cold: T,
    pub final_counts: VisitCounts,
}

impl<T: Scalar> ExplorationTrace<T> {
    pub fn final_d_hat(&self) -> &[T] {
        &self.records.last().expect("at least one episode").d_hat
    }
}

/// `max(T, eps) / denominator`.
pub fn floored_estimate<T: Scalar>(counts: &VisitCounts, epsilon: T, denominator: u64) -> Vec<T> {
    let denom: T = from_count(denominator.max(1));
    counts
        .counts()
        .iter()
        .map(|&c| from_count::<T>(c).max(epsilon) / denom)
        .collect()
}

/// Runs `config.episodes` episodes and returns the full trace.
pub fn run_exploration<T: Scalar>(
    model: &MdpModel<T>,
    config: &ExplorationConfig<T>,
) -> Result<ExplorationTrace<T>> {
    if !(config.epsilon_cold > T::zero()) {
        return Err(Error::Parameter(
            "cold-start epsilon must be positive".into(),
        ));
    }
    if !(config.eta > T::zero()) {
        return Err(Error::Parameter("eta must be positive".into()));
    }
    if config.weights.len() != model.num_pairs() {
        return Err(Error::Dimension {
            what: "coverage weights",
            expected: model.num_pairs(),
            found: config.weights.len(),
        });
    }
    if config.initial_state >= model.num_states() {
        return Err(Error::Parameter(format!(
            "initial state {} out of range",
            config.initial_state
        )));
    }
    let objective = config.objective()?;
    let polytope = build_polytope(model, config.eta)?;
    if !feasibility_check(&polytope)?.feasible {
        return Err(Error::Infeasible);
    }
    let schedule = make_schedule(config.tau1, config.episodes)?;
    let (ns, na) = (model.num_states(), model.num_actions());

    let mut counts = VisitCounts::new(ns, na);
    let mut env = Environment::new(model, config.initial_state, config.seed);
    let mut records = Vec::with_capacity(schedule.len());
    let mut k_delta = None;

    for episode in schedule.episodes() {
        let started = Instant::now();
        // Gradient at T+(t_k) / t_k; the LP is invariant to the denominator.
        let estimate = floored_estimate(&counts, config.epsilon_cold, episode.start);
        let weights = objective.log_gradient_weights(&estimate)?;
        let solution = lp_maximize(&polytope, &weights.weights)?;
        let lp_value = solution.objective_value;
        let target = solution.into_point()?;
        let policy = policy_of_occupancy(&target, ns, na)?;

        env.run(&policy, episode.length, |s, a| counts.record(s, a));
        debug_assert_eq!(counts.total_steps(), episode.steps_after());

        let steps = counts.total_steps();
        let total: T = from_count(steps);
        let d_hat: Vec<T> = counts
            .counts()
            .iter()
            .map(|&c| from_count::<T>(c) / total)
            .collect();
        let floored = floored_estimate(&counts, config.epsilon_cold, steps);
        let u_hat = objective.value(&floored)?;
        let (ratio, _) = max_ratio(&config.weights, &floored)?;
        if k_delta.is_none() && d_hat.iter().all(|&x| x >= config.eta) {
            k_delta = Some(episode.k);
        }

        records.push(EpisodeRecord {
            k: episode.k,
            start: episode.start,
            length: episode.length,
            beta: episode.beta(),
            steps,
            counts: counts.counts().to_vec(),
            d_hat,
            u_hat,
            max_ratio: ratio,
            target,
            lp_value,
            policy,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }

    Ok(ExplorationTrace {
        num_states: ns,
        num_actions: na,
        schedule,
        records,
        k_delta,
        epsilon_cold: config.epsilon_cold,
        final_counts: counts,
    })
}

/// `xi_k = U_rho(d*) - U_rho(d_hat_k)` per episode.
///
/// `U` is re-evaluated from each episode's counts floored at the trace's
/// cold-start epsilon, so early values are finite; pre-coverage values can
/// carry clamping artifacts and are kept as they are.
pub fn approximation_error<T: Scalar>(
    trace: &ExplorationTrace<T>,
    d_star: &[T],
    objective: &RhoObjective<T>,
) -> Result<Vec<T>> {
    let u_star = objective.value(d_star)?;
    trace
        .records
        .iter()
        .map(|r| {
            let counts =
                VisitCounts::from_counts(trace.num_states, trace.num_actions, r.counts.clone())?;
            let floored = floored_estimate(&counts, trace.epsilon_cold, r.steps);
            Ok(u_star - objective.value(&floored)?)
        })
        .collect()
}
