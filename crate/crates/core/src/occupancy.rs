//! State–action occupancy measures: exact (policy-induced) and empirical
//! (from visit counts).

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};
use crate::mdp::{stationary_distribution, MdpModel, Policy};
use crate::scalar::Scalar;

/// Stationary visitation frequencies `d[s][a]`, row-major, of some stationary
/// policy. Always sums to one and satisfies flow balance for its model.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMeasure<T> {
    num_states: usize,
    num_actions: usize,
    values: Vec<T>,
}

impl<T: Scalar> OccupancyMeasure<T> {
    /// Checks normalization and flow balance against `model`.
    pub fn new(model: &MdpModel<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != model.num_pairs() {
            return Err(Error::Dimension {
                what: "occupancy",
                expected: model.num_pairs(),
                found: values.len(),
            });
        }
        if values.iter().any(|&v| !(v >= T::zero())) {
            return Err(Error::Domain("negative occupancy entry".into()));
        }
        let sum: T = values.iter().copied().sum();
        if (sum - T::one()).abs() > T::sum_tolerance() {
            return Err(Error::Domain(format!("occupancy sums to {sum}")));
        }
        let residual = flow_residual(model, &values);
        if residual > T::flow_tolerance() {
            return Err(Error::Domain(format!("flow-balance residual {residual}")));
        }
        Ok(Self {
            num_states: model.num_states(),
            num_actions: model.num_actions(),
            values,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, state: usize, action: usize) -> T {
        self.values[state * self.num_actions + action]
    }
}

/// Largest violation of `sum_a d[s'][a] = sum_{s,a} P(s'|s,a) d[s][a]` over `s'`.
pub fn flow_residual<T: Scalar>(model: &MdpModel<T>, d: &[T]) -> T {
    let (ns, na) = (model.num_states(), model.num_actions());
    let mut inflow = vec![T::zero(); ns];
    for s in 0..ns {
        for a in 0..na {
            let mass = d[s * na + a];
            for (dst, &p) in inflow.iter_mut().zip(model.row(s, a)) {
                *dst += p * mass;
            }
        }
    }
    (0..ns)
        .map(|s| {
            let out: T = d[s * na..(s + 1) * na].iter().copied().sum();
            (out - inflow[s]).abs()
        })
        .fold(T::zero(), T::max)
}

/// `d[s][a] = psi_pi(s) * pi(a|s)`.
pub fn occupancy_of_policy<T: Scalar>(
    model: &MdpModel<T>,
    policy: &Policy<T>,
) -> Result<OccupancyMeasure<T>> {
    let psi = stationary_distribution(model, policy)?;
    let na = model.num_actions();
    let values = psi
        .probs()
        .iter()
        .enumerate()
        .flat_map(|(s, &mass)| policy.row(s).iter().map(move |&p| mass * p))
        .collect::<Vec<_>>();
    debug_assert_eq!(values.len(), model.num_states() * na);
    OccupancyMeasure::new(model, values)
}

/// `pi(a|s) = d[s][a] / sum_b d[s][b]`.
pub fn policy_of_occupancy<T: Scalar>(
    d: &[T],
    num_states: usize,
    num_actions: usize,
) -> Result<Policy<T>> {
    if d.len() != num_states * num_actions {
        return Err(Error::Dimension {
            what: "occupancy",
            expected: num_states * num_actions,
            found: d.len(),
        });
    }
    let mut probs = Vec::with_capacity(d.len());
    for (s, row) in d.chunks(num_actions).enumerate() {
        if row.iter().any(|&v| !(v >= T::zero())) {
            return Err(Error::Domain(format!("negative occupancy in state {s}")));
        }
        let marginal: T = row.iter().copied().sum();
        if !(marginal > T::zero()) {
            return Err(Error::DegenerateOccupancy { state: s });
        }
        probs.extend(row.iter().map(|&v| v / marginal));
    }
    Ok(Policy::from_parts_unchecked(num_states, num_actions, probs))
}

/// Per-pair visit counts `T[s][a]` and their total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitCounts {
    num_states: usize,
    num_actions: usize,
    counts: Vec<u64>,
    total_steps: u64,
}

impl VisitCounts {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            counts: vec![0; num_states * num_actions],
            total_steps: 0,
        }
    }

    pub fn from_counts(num_states: usize, num_actions: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != num_states * num_actions {
            return Err(Error::Dimension {
                what: "visit counts",
                expected: num_states * num_actions,
                found: counts.len(),
            });
        }
        let total_steps = counts.iter().sum();
        Ok(Self {
            num_states,
            num_actions,
            counts,
            total_steps,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    pub fn get(&self, state: usize, action: usize) -> u64 {
        self.counts[state * self.num_actions + action]
    }

    pub fn record(&mut self, state: usize, action: usize) {
        self.counts[state * self.num_actions + action] += 1;
        self.total_steps += 1;
    }

    /// Adds every `(s, a)` of `trajectory`.
    pub fn update<I: IntoIterator<Item = (usize, usize)>>(&mut self, trajectory: I) {
        for (s, a) in trajectory {
            self.record(s, a);
        }
    }
}

/// `counts / total_steps`.
///
/// Normalizes by the number of recorded steps so the result is a probability
/// vector. It is an estimate and need not satisfy flow balance.
pub fn empirical_occupancy<T: Clone + Num + FromPrimitive>(counts: &VisitCounts) -> Result<Vec<T>> {
    if counts.total_steps() == 0 {
        return Err(Error::EmptyHistory);
    }
    let total = T::from_u64(counts.total_steps()).expect("step count representable");
    Ok(counts
        .counts()
        .iter()
        .map(|&c| T::from_u64(c).expect("count representable") / total.clone())
        .collect())
}

/// `beta * b + (1 - beta) * a`.
///
/// With `a` the running empirical occupancy and `b` the latest episode's
/// frequencies, this is the Frank–Wolfe style averaging step.
pub fn mix_occupancies<T: Clone + Num>(a: &[T], b: &[T], beta: T) -> Vec<T> {
    assert_eq!(a.len(), b.len(), "occupancy vectors must have equal length");
    let keep = T::one() - beta.clone();
    a.iter()
        .zip(b)
        .map(|(x, y)| beta.clone() * y.clone() + keep.clone() * x.clone())
        .collect()
}
