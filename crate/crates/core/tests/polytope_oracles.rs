mod common;

use rand::Rng;
use rhocover_core::mdp::{random_ergodic_mdp, MdpModel, Policy};
use rhocover_core::objective::{max_ratio, CoverageWeights, RhoObjective};
use rhocover_core::occupancy::occupancy_of_policy;
use rhocover_core::polytope::{
    auto_eta, build_polytope, feasibility_check, lp_maximize, minimax_occupancy, OccupancyPolytope,
};

use common::{max_abs_diff, positive_vector, rng, two_state_occupancy};

fn grid_maximum(kernel: &[f64], objective: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=100 {
        for j in 0..=100 {
            let d = two_state_occupancy(kernel, i as f64 / 100.0, j as f64 / 100.0);
            let value: f64 = d.iter().zip(objective).map(|(x, c)| x * c).sum();
            best = best.max(value);
        }
    }
    best
}

#[test]
fn lp_matches_policy_grid_on_two_state_models() {
    let mut r = rng(1);
    for seed in 0..20 {
        let model: MdpModel<f64> = random_ergodic_mdp(2, 2, 1.0, 0.05, 100 + seed).unwrap();
        let objective: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        let polytope = build_polytope(&model, 0.0).unwrap();
        let solution = lp_maximize(&polytope, &objective).unwrap();
        let oracle = grid_maximum(model.kernel(), &objective);
        assert!(
            (solution.objective_value - oracle).abs() <= 1e-6,
            "seed {seed}"
        );
    }
}

#[test]
fn two_state_closed_form_agrees_with_solver() {
    let model: MdpModel<f64> = random_ergodic_mdp(2, 2, 1.0, 0.05, 4).unwrap();
    let policy = Policy::new(2, 2, vec![0.3, 0.7, 0.9, 0.1]).unwrap();
    let d = occupancy_of_policy(&model, &policy).unwrap();
    assert!(max_abs_diff(d.values(), &two_state_occupancy(model.kernel(), 0.3, 0.9)) <= 1e-14);
}

fn sample_polytope_point<R: Rng>(
    polytope: &OccupancyPolytope<f64>,
    interior: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    let n = polytope.num_pairs();
    let mut point: Vec<f64> = interior.to_vec();
    let mut kept = 1.0;
    for _ in 0..3 {
        let objective: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let vertex = lp_maximize(polytope, &objective)
            .unwrap()
            .into_point()
            .unwrap();
        let share = rng.random_range(0.0..kept);
        for (x, v) in point.iter_mut().zip(&vertex) {
            *x = (1.0 - share) * *x + share * v;
        }
        kept -= share;
    }
    point
}

#[test]
fn lp_solutions_are_feasible_and_deterministic() {
    let mut r = rng(2);
    for seed in 0..20 {
        let model: MdpModel<f64> = random_ergodic_mdp(4, 3, 0.7, 0.05, seed).unwrap();
        let eta = auto_eta(&model).unwrap();
        let polytope = build_polytope(&model, eta).unwrap();
        let objective: Vec<f64> = (0..12).map(|_| r.random_range(-1.0..1.0)).collect();
        let a = lp_maximize(&polytope, &objective).unwrap();
        let b = lp_maximize(&polytope, &objective).unwrap();
        assert_eq!(a, b);
        assert!(polytope.max_violation(&a.point) <= 1e-8);
    }
}

#[test]
fn lp_vertex_is_scale_invariant() {
    let mut r = rng(3);
    for seed in 0..20 {
        let model: MdpModel<f64> = random_ergodic_mdp(3, 3, 1.0, 0.05, seed).unwrap();
        let polytope = build_polytope(&model, auto_eta(&model).unwrap()).unwrap();
        let objective: Vec<f64> = (0..9).map(|_| r.random_range(0.0..1.0)).collect();
        let base = lp_maximize(&polytope, &objective).unwrap().point;
        for c in [1e-6, 1e6] {
            let scaled: Vec<f64> = objective.iter().map(|x| c * x).collect();
            let point = lp_maximize(&polytope, &scaled).unwrap().point;
            assert!(
                max_abs_diff(&base, &point) <= 1e-12,
                "seed {seed}, scale {c}"
            );
        }
    }
}

#[test]
fn minimax_lower_bounds_every_policy() {
    let model: MdpModel<f64> = random_ergodic_mdp(3, 2, 1.0, 0.05, 12).unwrap();
    let mut r = rng(4);
    let weights = CoverageWeights::new(positive_vector(&mut r, 6, 0.2, 2.0)).unwrap();
    let solution = minimax_occupancy(&model, &weights, 0.0).unwrap();
    let value = solution.minimax_value();
    let (ratio, _) = max_ratio(&weights, &solution.occupancy).unwrap();
    assert!((ratio - value).abs() <= 1e-7 * value);
    for _ in 0..10_000 {
        let policy = Policy::random_full_support(3, 2, &mut r);
        let d = occupancy_of_policy(&model, &policy).unwrap();
        let (ratio, _) = max_ratio(&weights, d.values()).unwrap();
        assert!(ratio >= value * (1.0 - 1e-9));
        let m = 1.0 / ratio;
        assert!(m <= solution.m_star * (1.0 + 1e-9));
    }
}

#[test]
fn over_restricted_polytope_is_infeasible() {
    let model: MdpModel<f64> = random_ergodic_mdp(3, 2, 1.0, 0.05, 1).unwrap();
    let polytope = build_polytope(&model, 0.1).unwrap();
    assert!(!feasibility_check(&polytope).unwrap().feasible);
    assert!(
        feasibility_check(&build_polytope(&model, 0.0).unwrap())
            .unwrap()
            .feasible
    );
}

#[test]
fn gradient_is_lipschitz_on_restricted_polytope() {
    let model: MdpModel<f64> = random_ergodic_mdp(3, 2, 1.0, 0.05, 3).unwrap();
    let eta = 0.01 / 6.0;
    let polytope = build_polytope(&model, eta).unwrap();
    let interior = occupancy_of_policy(&model, &Policy::uniform(3, 2))
        .unwrap()
        .into_vec();
    assert!(polytope.contains(&interior));
    let mut r = rng(5);
    for rho in [1.0, 2.0, 3.0] {
        let weights = CoverageWeights::new(positive_vector(&mut r, 6, 0.2, 1.0)).unwrap();
        let obj = RhoObjective::new(rho, weights).unwrap();
        let bound = obj.smoothness_constant(eta).unwrap();
        for _ in 0..300 {
            let d = sample_polytope_point(&polytope, &interior, &mut r);
            let e = sample_polytope_point(&polytope, &interior, &mut r);
            assert!(polytope.contains(&d) && polytope.contains(&e));
            let (gd, ge) = (obj.gradient(&d).unwrap(), obj.gradient(&e).unwrap());
            let lhs = gd
                .iter()
                .zip(&ge)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let rhs = d
                .iter()
                .zip(&e)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(lhs <= bound * rhs, "rho {rho}: {lhs} > {bound} * {rhs}");
        }
    }
}
