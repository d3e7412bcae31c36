mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rhocover_core::objective::{entropy, kl_divergence, max_ratio, CoverageWeights, RhoObjective};

use common::{interior_point, positive_vector, rng};

fn simplex_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    })
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..3.0, n)
}

fn rho_value() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(4.0), 1.0f64..8.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn objective_is_concave(
        mu in weights(6),
        d in simplex_point(6),
        e in simplex_point(6),
        lambda in 0.01f64..0.99,
        rho in rho_value(),
    ) {
        let obj = RhoObjective::new(rho, CoverageWeights::new(mu).unwrap()).unwrap();
        let mid: Vec<f64> = d.iter().zip(&e).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
        let lhs = obj.value(&mid).unwrap();
        let rhs = lambda * obj.value(&d).unwrap() + (1.0 - lambda) * obj.value(&e).unwrap();
        prop_assert!(lhs >= rhs - 1e-9 * (1.0 + rhs.abs()), "{lhs} < {rhs}");
    }

    #[test]
    fn gradient_matches_central_differences(
        mu in prop::collection::vec(0.5f64..2.0, 12),
        d in prop::collection::vec(0.5f64..1.5, 12).prop_map(|raw| {
            let t: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / t).collect::<Vec<_>>()
        }),
        rho in prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(4.0)],
    ) {
        let obj = RhoObjective::new(rho, CoverageWeights::new(mu).unwrap()).unwrap();
        let grad = obj.gradient(&d).unwrap();
        let h = 1e-6;
        for i in 0..d.len() {
            let mut plus = d.clone();
            let mut minus = d.clone();
            plus[i] += h;
            minus[i] -= h;
            let fd = (obj.value(&plus).unwrap() - obj.value(&minus).unwrap()) / (2.0 * h);
            let rel = (fd - grad[i]).abs() / grad[i].abs();
            prop_assert!(rel <= 1e-5, "pair {i}: fd {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn gradient_is_decreasing_in_each_coordinate(
        mu in weights(4),
        d in simplex_point(4),
        i in 0usize..4,
        bump in 0.001f64..0.5,
        rho in rho_value(),
    ) {
        let obj = RhoObjective::new(rho, CoverageWeights::new(mu).unwrap()).unwrap();
        let mut e = d.clone();
        e[i] += bump;
        prop_assert!(obj.gradient(&e).unwrap()[i] < obj.gradient(&d).unwrap()[i]);
    }

    #[test]
    fn log_weights_share_argmax_and_scale(
        mu in weights(8),
        d in simplex_point(8),
        rho in 1.0f64..20.0,
    ) {
        let obj = RhoObjective::new(rho, CoverageWeights::new(mu).unwrap()).unwrap();
        let grad = obj.gradient(&d).unwrap();
        let scaled = obj.log_gradient_weights(&d).unwrap();
        let gmax = grad.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert!(scaled.weights.iter().all(|&w| w > 0.0 && w <= 1.0));
        prop_assert!(scaled.weights.contains(&1.0));
        for (i, (&g, &w)) in grad.iter().zip(&scaled.weights).enumerate() {
            prop_assert_eq!(g == gmax, w == 1.0, "pair {}", i);
            let restored = w * scaled.log_scale.exp();
            prop_assert!((restored - g).abs() <= 1e-12 * g, "{restored} vs {g}");
        }
    }

    #[test]
    fn v_rho_sandwich(
        mu in weights(6),
        d in simplex_point(6),
        rho in prop_oneof![Just(2.0), Just(8.0), Just(32.0), Just(128.0), Just(1024.0)],
    ) {
        let w = CoverageWeights::new(mu).unwrap();
        let (r_max, i) = max_ratio(&w, &d).unwrap();
        let v = RhoObjective::new(rho, w).unwrap().v_rho(&d).unwrap();
        let lower = d[i].powf(1.0 / rho) * r_max;
        prop_assert!(lower <= v * (1.0 + 1e-12), "{lower} > {v}");
        prop_assert!(v <= r_max * (1.0 + 1e-12), "{v} > {r_max}");
    }

    #[test]
    fn log_branch_is_kl_plus_entropy(mu in weights(6), d in simplex_point(6)) {
        let w = CoverageWeights::new(mu.clone()).unwrap();
        let total: f64 = mu.iter().sum();
        let bar = w.normalized();
        let u = RhoObjective::new(1.0, w).unwrap().value(&d).unwrap();
        let via_kl = -total * (kl_divergence(&bar, &d).unwrap() + entropy(&bar));
        prop_assert!((u - via_kl).abs() <= 1e-10 * (1.0 + u.abs()), "{u} vs {via_kl}");
    }

    #[test]
    fn quadratic_branch_penalizes_inverse_coverage(mu in weights(6), d in simplex_point(6)) {
        let u = RhoObjective::new(2.0, CoverageWeights::new(mu.clone()).unwrap())
            .unwrap()
            .value(&d)
            .unwrap();
        let direct: f64 = -mu.iter().zip(&d).map(|(m, x)| m * m / x).sum::<f64>();
        prop_assert!((u - direct).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn kl_is_nonnegative(p in simplex_point(5), q in simplex_point(5)) {
        prop_assert!(kl_divergence(&p, &q).unwrap() >= -1e-15);
    }
}

#[test]
fn log_branch_is_maximized_at_normalized_weights() {
    let mut r = rng(11);
    for _ in 0..50 {
        let w = CoverageWeights::new(positive_vector(&mut r, 5, 0.1, 3.0)).unwrap();
        let obj = RhoObjective::new(1.0, w.clone()).unwrap();
        let best = obj.value(&w.normalized()).unwrap();
        let d = interior_point(&mut r, 5, 0.01, 1.0);
        assert!(obj.value(&d).unwrap() <= best + 1e-12);
    }
}

#[test]
fn gradient_ratio_grows_with_rho() {
    // (mu, d) with ratios r = (4, 2, 1).
    let w = CoverageWeights::new(vec![0.8, 0.6, 0.2]).unwrap();
    let d = [0.2, 0.3, 0.2];
    let mut last = [0.0; 3];
    for rho in [1.0, 1.5, 2.0, 3.0, 5.0, 8.0] {
        let g = RhoObjective::new(rho, w.clone())
            .unwrap()
            .gradient(&d)
            .unwrap();
        let current = [g[0] / g[1], g[0] / g[2], g[1] / g[2]];
        for (now, before) in current.iter().zip(&last) {
            assert!(now > before);
        }
        assert_relative_eq!(current[0], 2f64.powf(rho), max_relative = 1e-12);
        assert_relative_eq!(current[1], 4f64.powf(rho), max_relative = 1e-12);
        last = current;
    }
}

#[test]
fn v_rho_sweep_is_nondecreasing_toward_max_ratio() {
    let w = CoverageWeights::new(vec![1.0, 2.0]).unwrap();
    let d = [0.5, 0.5];
    let mut previous = 0.0f64;
    let mut rho = 2.0;
    while rho <= 1024.0 {
        let v = RhoObjective::new(rho, w.clone())
            .unwrap()
            .v_rho(&d)
            .unwrap();
        assert!(v >= previous, "rho {rho}: {v} < {previous}");
        assert!(v <= 4.0 + 1e-12);
        previous = v;
        rho *= 2.0;
    }
    assert!((previous - 4.0).abs() / 4.0 <= 1e-3);
}

#[test]
fn v_rho_tracks_max_ratio_at_large_rho() {
    let mut r = rng(5);
    for _ in 0..50 {
        let w = CoverageWeights::new(positive_vector(&mut r, 6, 0.1, 3.0)).unwrap();
        let d = interior_point(&mut r, 6, 0.05, 1.0);
        let (r_max, _) = max_ratio(&w, &d).unwrap();
        let v = RhoObjective::new(1024.0, w).unwrap().v_rho(&d).unwrap();
        assert!((v - r_max).abs() / r_max <= 0.01);
    }
}

#[test]
fn single_precision_objective_agrees_with_double() {
    let mu = [1.0, 2.0, 0.5, 1.5];
    let d = [0.2, 0.3, 0.1, 0.4];
    for rho in [1.0, 2.0, 3.5] {
        let wide = RhoObjective::new(rho, CoverageWeights::new(mu.to_vec()).unwrap()).unwrap();
        let narrow = RhoObjective::new(
            rho as f32,
            CoverageWeights::new(mu.iter().map(|&x| x as f32).collect()).unwrap(),
        )
        .unwrap();
        let d32: Vec<f32> = d.iter().map(|&x| x as f32).collect();
        let a = wide.value(&d).unwrap();
        let b = narrow.value(&d32).unwrap() as f64;
        assert_relative_eq!(a, b, max_relative = 1e-5);
    }
}
