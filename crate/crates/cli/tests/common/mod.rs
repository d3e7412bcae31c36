#![allow(dead_code)]

/// Closed-form occupancy of a 2-state, 2-action model under the policy
/// taking action 0 with probability `p0` in state 0 and `p1` in state 1.
pub fn two_state_occupancy(kernel: &[f64], p0: f64, p1: f64) -> [f64; 4] {
    let to1 = |s: usize, a: usize| kernel[(s * 2 + a) * 2 + 1];
    let leave0 = p0 * to1(0, 0) + (1.0 - p0) * to1(0, 1);
    let enter0 = 1.0 - (p1 * to1(1, 0) + (1.0 - p1) * to1(1, 1));
    let psi0 = enter0 / (leave0 + enter0);
    let psi1 = 1.0 - psi0;
    [psi0 * p0, psi0 * (1.0 - p0), psi1 * p1, psi1 * (1.0 - p1)]
}
