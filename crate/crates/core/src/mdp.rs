//! Finite controlled Markov chains: the transition kernel, stationary policies,
//! structural validation and simulation.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Transition kernel `P(s' | s, a)` over `S` states and `A` actions.
///
/// Stored flat in row-major `(s, a, s')` order. Construction only checks
/// shapes; stochasticity and ergodicity are checked by [`validate_mdp`].
#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel<T> {
    num_states: usize,
    num_actions: usize,
    kernel: Vec<T>,
}

impl<T: Scalar> MdpModel<T> {
    pub fn new(num_states: usize, num_actions: usize, kernel: Vec<T>) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::Parameter("number of states must be positive".into()));
        }
        if num_actions == 0 {
            return Err(Error::Parameter(
                "number of actions must be positive".into(),
            ));
        }
        let expected = num_states * num_actions * num_states;
        if kernel.len() != expected {
            return Err(Error::Dimension {
                what: "kernel",
                expected,
                found: kernel.len(),
            });
        }
        Ok(Self {
            num_states,
            num_actions,
            kernel,
        })
    }

    /// Builds a model from `kernel[s][a][s']`.
    pub fn from_nested(kernel: &[Vec<Vec<T>>]) -> Result<Self> {
        let num_states = kernel.len();
        let num_actions = kernel.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(num_states * num_actions * num_states);
        for per_state in kernel {
            if per_state.len() != num_actions {
                return Err(Error::Dimension {
                    what: "actions per state",
                    expected: num_actions,
                    found: per_state.len(),
                });
            }
            for row in per_state {
                if row.len() != num_states {
                    return Err(Error::Dimension {
                        what: "kernel row",
                        expected: num_states,
                        found: row.len(),
                    });
                }
                flat.extend_from_slice(row);
            }
        }
        Self::new(num_states, num_actions, flat)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Number of state–action pairs, `S * A`.
    pub fn num_pairs(&self) -> usize {
        self.num_states * self.num_actions
    }

    pub fn kernel(&self) -> &[T] {
        &self.kernel
    }

    /// Next-state distribution `P(. | s, a)`.
    pub fn row(&self, state: usize, action: usize) -> &[T] {
        let start = (state * self.num_actions + action) * self.num_states;
        &self.kernel[start..start + self.num_states]
    }

    pub fn prob(&self, state: usize, action: usize, next: usize) -> T {
        self.row(state, action)[next]
    }

    /// Kernel as nested vectors, `[s][a][s']`.
    pub fn to_nested(&self) -> Vec<Vec<Vec<T>>> {
        (0..self.num_states)
            .map(|s| {
                (0..self.num_actions)
                    .map(|a| self.row(s, a).to_vec())
                    .collect()
            })
            .collect()
    }

    /// State-to-state matrix `P_pi(s' | s) = sum_a pi(a|s) P(s'|s,a)`, row-major.
    pub fn induced_chain(&self, policy: &Policy<T>) -> Result<Vec<T>> {
        self.check_policy_shape(policy)?;
        let n = self.num_states;
        let mut chain = vec![T::zero(); n * n];
        for s in 0..n {
            for a in 0..self.num_actions {
                let w = policy.prob(s, a);
                if w == T::zero() {
                    continue;
                }
                for (dst, &p) in chain[s * n..(s + 1) * n].iter_mut().zip(self.row(s, a)) {
                    *dst += w * p;
                }
            }
        }
        Ok(chain)
    }

    pub(crate) fn check_policy_shape(&self, policy: &Policy<T>) -> Result<()> {
        if policy.num_states() != self.num_states {
            return Err(Error::Dimension {
                what: "policy states",
                expected: self.num_states,
                found: policy.num_states(),
            });
        }
        if policy.num_actions() != self.num_actions {
            return Err(Error::Dimension {
                what: "policy actions",
                expected: self.num_actions,
                found: policy.num_actions(),
            });
        }
        Ok(())
    }

    /// Converts every probability to another scalar type.
    pub fn cast<U: Scalar>(&self) -> MdpModel<U> {
        MdpModel {
            num_states: self.num_states,
            num_actions: self.num_actions,
            kernel: self
                .kernel
                .iter()
                .map(|x| U::from(*x).expect("finite probability"))
                .collect(),
        }
    }
}

/// Stationary randomized policy `pi(a | s)`, stored row-major `(s, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy<T> {
    num_states: usize,
    num_actions: usize,
    probs: Vec<T>,
}

impl<T: Scalar> Policy<T> {
    /// Validates that every row is a probability vector.
    pub fn new(num_states: usize, num_actions: usize, probs: Vec<T>) -> Result<Self> {
        if probs.len() != num_states * num_actions {
            return Err(Error::Dimension {
                what: "policy",
                expected: num_states * num_actions,
                found: probs.len(),
            });
        }
        for (s, row) in probs.chunks(num_actions.max(1)).enumerate() {
            if row.iter().any(|&p| !(p >= T::zero() && p <= T::one())) {
                return Err(Error::Domain(format!(
                    "policy row {s} has an entry outside [0, 1]"
                )));
            }
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs() > T::row_tolerance() {
                return Err(Error::Domain(format!("policy row {s} sums to {sum}")));
            }
        }
        Ok(Self {
            num_states,
            num_actions,
            probs,
        })
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        let p = T::one() / T::from_usize(num_actions).expect("action count");
        Self {
            num_states,
            num_actions,
            probs: vec![p; num_states * num_actions],
        }
    }

    /// Policy with every row drawn from a flat Dirichlet, so all entries are positive.
    pub fn random_full_support<R: Rng>(num_states: usize, num_actions: usize, rng: &mut R) -> Self {
        let gamma = Gamma::<f64>::new(1.0, 1.0).expect("valid gamma");
        let mut probs = Vec::with_capacity(num_states * num_actions);
        for _ in 0..num_states {
            let draws: Vec<f64> = (0..num_actions)
                .map(|_| gamma.sample(rng).max(1e-3))
                .collect();
            let total: f64 = draws.iter().sum();
            probs.extend(draws.iter().map(|x| lit::<T>(x / total)));
        }
        Self {
            num_states,
            num_actions,
            probs,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Action distribution `pi(. | s)`.
    pub fn row(&self, state: usize) -> &[T] {
        &self.probs[state * self.num_actions..(state + 1) * self.num_actions]
    }

    pub fn prob(&self, state: usize, action: usize) -> T {
        self.probs[state * self.num_actions + action]
    }

    pub(crate) fn from_parts_unchecked(
        num_states: usize,
        num_actions: usize,
        probs: Vec<T>,
    ) -> Self {
        Self {
            num_states,
            num_actions,
            probs,
        }
    }
}

/// Probability distribution over states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution<T> {
    probs: Vec<T>,
}

impl<T: Scalar> StateDistribution<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.iter().any(|&p| !(p >= T::zero())) {
            return Err(Error::Domain("negative state probability".into()));
        }
        let sum: T = probs.iter().copied().sum();
        if (sum - T::one()).abs() > T::sum_tolerance() {
            return Err(Error::Domain(format!("state distribution sums to {sum}")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }
}

/// A single failed check in a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Entry outside `[0, 1]` or not finite.
    Entry {
        state: usize,
        action: usize,
        next: usize,
        value: f64,
    },
    RowSum {
        state: usize,
        action: usize,
        sum: f64,
    },
    /// States not mutually reachable with state 0 under the uniform policy.
    Unreachable {
        states: Vec<usize>,
    },
    Periodic {
        period: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Entry {
                state,
                action,
                next,
                value,
            } => write!(
                f,
                "entry P({next}|{state},{action}) = {value} outside [0, 1]"
            ),
            Violation::RowSum { state, action, sum } => {
                write!(f, "row ({state},{action}): row sum {sum} ≠ 1")
            }
            Violation::Unreachable { states } => {
                write!(
                    f,
                    "irreducibility: states {states:?} not strongly connected"
                )
            }
            Violation::Periodic { period } => write!(f, "aperiodicity: chain has period {period}"),
        }
    }
}

/// Outcome of [`validate_mdp`]; empty means the model is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks row-stochasticity and that the uniform-policy chain is irreducible
/// and aperiodic.
///
/// Only the first failing row is reported. The structural checks use the
/// digraph with an edge `s -> s'` whenever some action moves there with
/// positive probability, so they are exact.
pub fn validate_mdp<T: Scalar>(model: &MdpModel<T>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (ns, na) = (model.num_states(), model.num_actions());

    'rows: for s in 0..ns {
        for a in 0..na {
            let row = model.row(s, a);
            for (next, &p) in row.iter().enumerate() {
                if !(p >= T::zero() && p <= T::one()) {
                    report.violations.push(Violation::Entry {
                        state: s,
                        action: a,
                        next,
                        value: p.to_f64().unwrap_or(f64::NAN),
                    });
                    break 'rows;
                }
            }
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs() > T::row_tolerance() {
                report.violations.push(Violation::RowSum {
                    state: s,
                    action: a,
                    sum: sum.to_f64().unwrap_or(f64::NAN),
                });
                break 'rows;
            }
        }
    }

    let successors: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            (0..ns)
                .filter(|&next| (0..na).any(|a| model.prob(s, a, next) > T::zero()))
                .collect()
        })
        .collect();
    let mut predecessors = vec![Vec::new(); ns];
    for (s, succ) in successors.iter().enumerate() {
        for &next in succ {
            predecessors[next].push(s);
        }
    }

    let forward = bfs_levels(&successors, 0);
    let backward = bfs_levels(&predecessors, 0);
    let unreachable: Vec<usize> = (0..ns)
        .filter(|&s| forward[s].is_none() || backward[s].is_none())
        .collect();
    if !unreachable.is_empty() {
        report.violations.push(Violation::Unreachable {
            states: unreachable,
        });
        return report;
    }

    // Period = gcd over edges u -> v of level(u) + 1 - level(v).
    let mut period = 0usize;
    for (u, succ) in successors.iter().enumerate() {
        let lu = forward[u].expect("reachable");
        for &v in succ {
            let lv = forward[v].expect("reachable");
            period = gcd(period, (lu + 1).abs_diff(lv));
        }
    }
    if period != 1 {
        report.violations.push(Violation::Periodic { period });
    }
    report
}

fn bfs_levels(adjacency: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adjacency.len()];
    let mut queue = VecDeque::new();
    level[start] = Some(0);
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        let next_level = level[u].map(|l| l + 1);
        for &v in &adjacency[u] {
            if level[v].is_none() {
                level[v] = next_level;
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Stationary distribution of the chain induced by `policy`.
///
/// Solves `(P_pi^T - I) psi = 0` with the last equation replaced by
/// `sum(psi) = 1`, by Gaussian elimination with partial pivoting. A vanishing
/// pivot means more than one recurrent class and is reported as
/// [`Error::NotErgodic`].
pub fn stationary_distribution<T: Scalar>(
    model: &MdpModel<T>,
    policy: &Policy<T>,
) -> Result<StateDistribution<T>> {
    let n = model.num_states();
    let chain = model.induced_chain(policy)?;

    // system[i][j] = P_pi(j -> i) - [i == j]
    let mut system = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            system[i * n + j] = chain[j * n + i];
        }
        system[i * n + i] -= T::one();
    }
    let mut rhs = vec![T::zero(); n];
    for j in 0..n {
        system[(n - 1) * n + j] = T::one();
    }
    rhs[n - 1] = T::one();

    let mut psi = solve_dense(&mut system, &mut rhs, n).ok_or_else(|| {
        Error::NotErgodic("stationary system is singular (multiple recurrent classes)".into())
    })?;

    for p in &mut psi {
        if *p < T::zero() {
            if *p < -T::sum_tolerance() {
                return Err(Error::NotErgodic(format!(
                    "stationary solve produced negative mass {p}"
                )));
            }
            *p = T::zero();
        }
    }
    let total: T = psi.iter().copied().sum();
    for p in &mut psi {
        *p /= total;
    }
    StateDistribution::new(psi)
}

/// In-place Gaussian elimination with partial pivoting on a row-major `n x n`
/// system. Returns `None` if a pivot falls below the singular tolerance.
pub(crate) fn solve_dense<T: Scalar>(a: &mut [T], b: &mut [T], n: usize) -> Option<Vec<T>> {
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .abs()
                    .partial_cmp(&a[j * n + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty range");
        if !(a[pivot_row * n + col].abs() > T::singular_tolerance()) {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for i in col + 1..n {
            let factor = a[i * n + col] / pivot;
            if factor == T::zero() {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[i * n + j] -= factor * v;
            }
            let bv = b[col];
            b[i] -= factor * bv;
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= a[i * n + j] * x[j];
        }
        x[i] = acc / a[i * n + i];
    }
    Some(x)
}

/// Index drawn from `probs` by inverse CDF at the uniform draw `u in [0, 1)`.
///
/// Zero-probability entries are never returned; if rounding leaves the
/// cumulative sum below `u`, the last positive entry is used.
pub fn sample_index<T: Scalar>(probs: &[T], u: T) -> usize {
    let mut cumulative = T::zero();
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > T::zero() {
            cumulative += p;
            last_positive = i;
            if u < cumulative {
                return i;
            }
        }
    }
    last_positive
}

/// Draws the next state from `P(. | state, action)` using one uniform draw.
pub fn step<T: Scalar, R: Rng>(
    model: &MdpModel<T>,
    state: usize,
    action: usize,
    rng: &mut R,
) -> usize {
    let u: f64 = rng.random();
    sample_index(model.row(state, action), lit(u))
}

/// Random model whose rows are `(1 - lambda) * Dirichlet(alpha) + lambda * uniform`.
///
/// Every transition has probability at least `lambda / S`, so every
/// stationary policy induces an irreducible aperiodic chain.
pub fn random_ergodic_mdp<T: Scalar>(
    num_states: usize,
    num_actions: usize,
    alpha: f64,
    lambda_mix: f64,
    seed: u64,
) -> Result<MdpModel<T>> {
    if num_states < 2 {
        return Err(Error::Parameter(
            "random_ergodic_mdp needs at least 2 states".into(),
        ));
    }
    if num_actions < 1 {
        return Err(Error::Parameter(
            "random_ergodic_mdp needs at least 1 action".into(),
        ));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!(
            "concentration {alpha} must be positive"
        )));
    }
    if !(lambda_mix > 0.0 && lambda_mix < 1.0) {
        return Err(Error::Parameter(format!(
            "lambda_mix {lambda_mix} must lie in (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::Parameter(e.to_string()))?;
    let uniform = 1.0 / num_states as f64;
    let mut kernel = Vec::with_capacity(num_states * num_actions * num_states);
    for _ in 0..num_states * num_actions {
        let draws: Vec<f64> = (0..num_states).map(|_| gamma.sample(&mut rng)).collect();
        let total: f64 = draws.iter().sum();
        let row: Vec<f64> = if total > 0.0 {
            draws
                .iter()
                .map(|x| (1.0 - lambda_mix) * x / total + lambda_mix * uniform)
                .collect()
        } else {
            vec![uniform; num_states]
        };
        let row_sum: f64 = row.iter().sum();
        kernel.extend(row.iter().map(|x| lit::<T>(x / row_sum)));
    }
    MdpModel::new(num_states, num_actions, kernel)
}

/// Single simulated trajectory whose state persists across calls.
#[derive(Debug, Clone)]
pub struct Environment<'a, T> {
    model: &'a MdpModel<T>,
    state: usize,
    rng: ChaCha8Rng,
}

impl<'a, T: Scalar> Environment<'a, T> {
    pub fn new(model: &'a MdpModel<T>, initial_state: usize, seed: u64) -> Self {
        Self {
            model,
            state: initial_state,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    /// Samples `a ~ pi(. | s)`, moves to the next state and returns the visited pair.
    pub fn act(&mut self, policy: &Policy<T>) -> (usize, usize) {
        let s = self.state;
        let u: f64 = self.rng.random();
        let a = sample_index(policy.row(s), lit(u));
        self.state = step(self.model, s, a, &mut self.rng);
        (s, a)
    }

    /// Runs `policy` for `steps` steps, calling `visit` on each `(s, a)`.
    pub fn run<F: FnMut(usize, usize)>(&mut self, policy: &Policy<T>, steps: u64, mut visit: F) {
        for _ in 0..steps {
            let (s, a) = self.act(policy);
            visit(s, a);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_state_cycle() -> MdpModel<f64> {
        MdpModel::from_nested(&[
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        ])
        .unwrap()
    }

    #[test]
    fn deterministic_cycle_is_periodic() {
        let report = validate_mdp(&two_state_cycle());
        assert_eq!(report.violations, vec![Violation::Periodic { period: 2 }]);
        assert!(report.to_string().contains("aperiodicity"));
    }

    #[test]
    fn bad_row_sum_is_named() {
        let model = MdpModel::from_nested(&[vec![vec![0.5, 0.6]], vec![vec![0.5, 0.5]]]).unwrap();
        let report = validate_mdp(&model);
        match &report.violations[0] {
            Violation::RowSum { state, action, sum } => {
                assert_eq!((*state, *action), (0, 0));
                assert_abs_diff_eq!(*sum, 1.1, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(report.to_string().contains("row sum 1.1 ≠ 1"));
    }

    #[test]
    fn unreachable_states_reported() {
        // state 1 absorbing, state 0 unreachable from it
        let model = MdpModel::from_nested(&[vec![vec![0.5, 0.5]], vec![vec![0.0, 1.0]]]).unwrap();
        let report = validate_mdp(&model);
        assert_eq!(
            report.violations,
            vec![Violation::Unreachable { states: vec![1] }]
        );
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let err = MdpModel::<f64>::new(2, 1, vec![1.0; 3]).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
        let err =
            MdpModel::<f64>::from_nested(&[vec![vec![1.0]], vec![vec![1.0, 0.0]]]).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn two_state_textbook_chain() {
        let (p, q) = (0.3, 0.6);
        let model =
            MdpModel::from_nested(&[vec![vec![1.0 - p, p]], vec![vec![q, 1.0 - q]]]).unwrap();
        let psi = stationary_distribution(&model, &Policy::uniform(2, 1)).unwrap();
        assert_abs_diff_eq!(psi.probs()[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(psi.probs()[1], 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn doubly_stochastic_chain_has_uniform_fixed_point() {
        let model = MdpModel::from_nested(&[
            vec![vec![0.2, 0.5, 0.3], vec![0.1, 0.1, 0.8]],
            vec![vec![0.5, 0.2, 0.3], vec![0.8, 0.1, 0.1]],
            vec![vec![0.3, 0.3, 0.4], vec![0.1, 0.8, 0.1]],
        ])
        .unwrap();
        let psi = stationary_distribution(&model, &Policy::uniform(3, 2)).unwrap();
        for &p in psi.probs() {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn reducible_chain_is_rejected() {
        let model = MdpModel::from_nested(&[vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]]).unwrap();
        let err = stationary_distribution(&model, &Policy::uniform(2, 1)).unwrap_err();
        assert!(matches!(err, Error::NotErgodic(_)));
    }

    #[test]
    fn sampling_point_mass_and_inverse_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = MdpModel::from_nested(&[
            vec![vec![0.0, 0.0, 1.0]],
            vec![vec![0.0, 0.0, 1.0]],
            vec![vec![0.0, 0.0, 1.0]],
        ])
        .unwrap();
        for _ in 0..100 {
            assert_eq!(step(&model, 0, 0, &mut rng), 2);
        }
        assert_eq!(sample_index(&[0.5, 0.5], 0.3), 0);
        assert_eq!(sample_index(&[0.5, 0.5], 0.7), 1);
        assert_eq!(sample_index(&[0.5, 0.0, 0.5], 0.9999999999999999), 2);
    }

    #[test]
    fn generator_lower_bound_and_determinism() {
        let a: MdpModel<f64> = random_ergodic_mdp(3, 2, 1.0, 0.1, 11).unwrap();
        let b: MdpModel<f64> = random_ergodic_mdp(3, 2, 1.0, 0.1, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.kernel().iter().all(|&p| p >= 0.1 / 3.0 - 1e-15));
        assert!(validate_mdp(&a).is_ok());
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        assert!(random_ergodic_mdp::<f64>(1, 2, 1.0, 0.1, 0).is_err());
        assert!(random_ergodic_mdp::<f64>(2, 0, 1.0, 0.1, 0).is_err());
        assert!(random_ergodic_mdp::<f64>(2, 2, 0.0, 0.1, 0).is_err());
        assert!(random_ergodic_mdp::<f64>(2, 2, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn policy_rows_checked() {
        assert!(Policy::new(1, 2, vec![0.5, 0.6]).is_err());
        assert!(Policy::new(1, 2, vec![-0.1, 1.1]).is_err());
        assert!(Policy::new(1, 2, vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn f32_model_matches_f64() {
        let model: MdpModel<f64> = random_ergodic_mdp(4, 2, 1.0, 0.05, 3).unwrap();
        let psi64 = stationary_distribution(&model, &Policy::uniform(4, 2)).unwrap();
        let model32: MdpModel<f32> = model.cast();
        let psi32 = stationary_distribution(&model32, &Policy::uniform(4, 2)).unwrap();
        for (a, b) in psi64.probs().iter().zip(psi32.probs()) {
            assert_abs_diff_eq!(*a, f64::from(*b), epsilon = 1e-5);
        }
    }
}
