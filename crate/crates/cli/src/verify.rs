//! Numerical property checks behind `rhocover verify`.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rhocover_core::explorer::make_schedule;
use rhocover_core::mdp::{stationary_distribution, validate_mdp, MdpModel, Policy};
use rhocover_core::model_file::ModelFile;
use rhocover_core::objective::{entropy, kl_divergence, max_ratio, CoverageWeights, RhoObjective};
use rhocover_core::occupancy::{flow_residual, occupancy_of_policy, policy_of_occupancy};
use rhocover_core::polytope::{
    auto_eta, build_polytope, feasibility_check, lp_maximize, minimax_occupancy,
};

use crate::config::{Instance, ModelSource, RunConfig};
use crate::error::{io_error, CliError, Result};

pub const MODEL_CHECK: &str = "model-validation";
pub const GRADIENT_CHECK: &str = "gradient-finite-difference";

const RHOS: [f64; 4] = [1.0, 1.5, 2.0, 4.0];
const SAMPLES: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.to_string())
            .collect()
    }

    /// `Ok` when every check passed, otherwise an error naming the failures.
    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(CliError::Verify(self.failures()))
        }
    }

    fn push(&mut self, name: &'static str, outcome: std::result::Result<String, String>) {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(CheckResult {
            name,
            passed,
            detail,
        });
    }
}

/// Runs every check and returns the report; the caller decides the exit code.
///
/// A model that fails structural validation stops the run after the first check.
pub fn verify(config: &RunConfig, fd_tolerance: f64) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let raw = match &config.model {
        ModelSource::File(path) => read_unvalidated(path)?,
        ModelSource::Generated(spec) => spec.generate()?,
    };
    let validation = validate_mdp(&raw);
    report.push(
        MODEL_CHECK,
        if validation.is_ok() {
            Ok(format!(
                "{} states, {} actions",
                raw.num_states(),
                raw.num_actions()
            ))
        } else {
            Err(validation.to_string())
        },
    );
    if !validation.is_ok() {
        return Ok(report);
    }

    let instance = config.instance()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    report.push(
        "stationary-residual",
        stationary_residual(&instance.model, &mut rng),
    );
    report.push(
        "policy-roundtrip",
        policy_roundtrip(&instance.model, &mut rng),
    );
    report.push(
        GRADIENT_CHECK,
        gradient_fd(&instance.weights, fd_tolerance, &mut rng),
    );
    report.push("concavity", concavity(&instance.weights, &mut rng));
    report.push(
        "log-weights-argmax",
        log_weights(&instance.weights, &mut rng),
    );
    report.push("v-rho-sandwich", sandwich(&instance.weights, &mut rng));
    report.push("kl-identity", kl_identity(&instance.weights, &mut rng));
    report.push("lp-feasibility", lp_feasibility(&instance, &mut rng));
    report.push("lp-scale-invariance", lp_scale(&instance, &mut rng));
    report.push("minimax-margin-agreement", minimax_margin(&instance.model));
    report.push("minimax-lower-bound", minimax_bound(&instance, &mut rng));
    report.push("gradient-lipschitz", lipschitz(&instance, &mut rng));
    report.push("schedule-identities", schedule_identities());
    Ok(report)
}

fn read_unvalidated(path: &Path) -> Result<MdpModel<f64>> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(MdpModel::from_nested(&file.kernel)?)
}

type Outcome = std::result::Result<String, String>;

fn check(worst: f64, bound: f64, what: &str) -> Outcome {
    let detail = format!("worst {what} {worst:.3e} (bound {bound:.1e})");
    if worst <= bound {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn interior<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn stationary_residual<R: Rng>(model: &MdpModel<f64>, rng: &mut R) -> Outcome {
    let ns = model.num_states();
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let policy = Policy::random_full_support(ns, model.num_actions(), rng);
        let psi = stationary_distribution(model, &policy).map_err(|e| e.to_string())?;
        let chain = model.induced_chain(&policy).map_err(|e| e.to_string())?;
        for t in 0..ns {
            let image: f64 = (0..ns).map(|s| psi.probs()[s] * chain[s * ns + t]).sum();
            worst = worst.max((image - psi.probs()[t]).abs());
        }
    }
    check(worst, 1e-10, "residual")
}

fn policy_roundtrip<R: Rng>(model: &MdpModel<f64>, rng: &mut R) -> Outcome {
    let (ns, na) = (model.num_states(), model.num_actions());
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let policy = Policy::random_full_support(ns, na, rng);
        let d = occupancy_of_policy(model, &policy).map_err(|e| e.to_string())?;
        if flow_residual(model, d.values()) > 1e-8 {
            return Err("occupancy violates flow balance".into());
        }
        let back = policy_of_occupancy(d.values(), ns, na).map_err(|e| e.to_string())?;
        for (a, b) in back.probs().iter().zip(policy.probs()) {
            worst = worst.max((a - b).abs());
        }
    }
    check(worst, 1e-9, "entry error")
}

fn gradient_fd<R: Rng>(weights: &CoverageWeights<f64>, tolerance: f64, rng: &mut R) -> Outcome {
    let n = weights.len();
    let h = 1e-6;
    let mut worst = 0.0f64;
    for &rho in &RHOS {
        let obj = RhoObjective::new(rho, weights.clone()).map_err(|e| e.to_string())?;
        for _ in 0..SAMPLES / 5 {
            let d = interior(rng, n);
            let grad = obj.gradient(&d).map_err(|e| e.to_string())?;
            for i in 0..n {
                let (mut plus, mut minus) = (d.clone(), d.clone());
                plus[i] += h;
                minus[i] -= h;
                let fd = (obj.value(&plus).map_err(|e| e.to_string())?
                    - obj.value(&minus).map_err(|e| e.to_string())?)
                    / (2.0 * h);
                worst = worst.max((fd - grad[i]).abs() / grad[i].abs());
            }
        }
    }
    check(worst, tolerance, "relative error")
}

fn concavity<R: Rng>(weights: &CoverageWeights<f64>, rng: &mut R) -> Outcome {
    let n = weights.len();
    let mut worst = f64::NEG_INFINITY;
    for &rho in &RHOS {
        let obj = RhoObjective::new(rho, weights.clone()).map_err(|e| e.to_string())?;
        for _ in 0..SAMPLES {
            let (d, e) = (interior(rng, n), interior(rng, n));
            let lambda: f64 = rng.random_range(0.01..0.99);
            let mid: Vec<f64> = d
                .iter()
                .zip(&e)
                .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
                .collect();
            let value = |p: &[f64]| obj.value(p).map_err(|e| e.to_string());
            let shortfall = lambda * value(&d)? + (1.0 - lambda) * value(&e)? - value(&mid)?;
            worst = worst.max(shortfall);
        }
    }
    check(worst, 1e-9, "chord excess")
}

fn log_weights<R: Rng>(weights: &CoverageWeights<f64>, rng: &mut R) -> Outcome {
    let n = weights.len();
    for &rho in &RHOS {
        let obj = RhoObjective::new(rho, weights.clone()).map_err(|e| e.to_string())?;
        for _ in 0..SAMPLES {
            let d = interior(rng, n);
            let grad = obj.gradient(&d).map_err(|e| e.to_string())?;
            let scaled = obj.log_gradient_weights(&d).map_err(|e| e.to_string())?;
            let top = grad.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let same = grad
                .iter()
                .zip(&scaled.weights)
                .all(|(&g, &w)| (g == top) == (w == 1.0) && w > 0.0 && w <= 1.0);
            if !same {
                return Err(format!("argmax sets differ at rho {rho}"));
            }
        }
    }
    Ok(format!("{} points", RHOS.len() * SAMPLES))
}

fn sandwich<R: Rng>(weights: &CoverageWeights<f64>, rng: &mut R) -> Outcome {
    let n = weights.len();
    let mut worst = 0.0f64;
    for rho in [2.0, 8.0, 32.0, 128.0, 1024.0] {
        let obj = RhoObjective::new(rho, weights.clone()).map_err(|e| e.to_string())?;
        for _ in 0..SAMPLES {
            let d = interior(rng, n);
            let v = obj.v_rho(&d).map_err(|e| e.to_string())?;
            let (r_max, i) = max_ratio(weights, &d).map_err(|e| e.to_string())?;
            let lower = d[i].powf(1.0 / rho) * r_max;
            worst = worst.max((lower - v) / r_max).max((v - r_max) / r_max);
        }
    }
    check(worst, 1e-12, "relative violation")
}

fn kl_identity<R: Rng>(weights: &CoverageWeights<f64>, rng: &mut R) -> Outcome {
    let obj = RhoObjective::new(1.0, weights.clone()).map_err(|e| e.to_string())?;
    let bar = weights.normalized();
    let total: f64 = weights.values().iter().sum();
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let d = interior(rng, weights.len());
        let u = obj.value(&d).map_err(|e| e.to_string())?;
        let kl = kl_divergence(&bar, &d).map_err(|e| e.to_string())?;
        worst = worst.max((u + total * (kl + entropy(&bar))).abs());
    }
    check(worst, 1e-10, "absolute error")
}

fn lp_feasibility<R: Rng>(instance: &Instance, rng: &mut R) -> Outcome {
    let polytope = build_polytope(&instance.model, instance.eta).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let c: Vec<f64> = (0..polytope.num_pairs())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let solution = lp_maximize(&polytope, &c).map_err(|e| e.to_string())?;
        let point = solution.into_point().map_err(|e| e.to_string())?;
        worst = worst.max(polytope.max_violation(&point));
    }
    check(worst, 1e-8, "constraint violation")
}

fn lp_scale<R: Rng>(instance: &Instance, rng: &mut R) -> Outcome {
    let polytope = build_polytope(&instance.model, instance.eta).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let c: Vec<f64> = (0..polytope.num_pairs())
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        let base = lp_maximize(&polytope, &c).map_err(|e| e.to_string())?.point;
        for scale in [1e-6, 1e6] {
            let scaled: Vec<f64> = c.iter().map(|x| x * scale).collect();
            let point = lp_maximize(&polytope, &scaled)
                .map_err(|e| e.to_string())?
                .point;
            for (a, b) in base.iter().zip(&point) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    check(worst, 1e-12, "vertex difference")
}

fn minimax_margin(model: &MdpModel<f64>) -> Outcome {
    let unit = CoverageWeights::new(vec![1.0; model.num_pairs()]).map_err(|e| e.to_string())?;
    let minimax = minimax_occupancy(model, &unit, 0.0).map_err(|e| e.to_string())?;
    let polytope = build_polytope(model, 0.0).map_err(|e| e.to_string())?;
    let margin = feasibility_check(&polytope)
        .map_err(|e| e.to_string())?
        .margin;
    check((minimax.m_star - margin).abs(), 1e-8, "difference")
}

fn minimax_bound<R: Rng>(instance: &Instance, rng: &mut R) -> Outcome {
    let model = &instance.model;
    let minimax = minimax_occupancy(model, &instance.weights, 0.0).map_err(|e| e.to_string())?;
    let value = minimax.minimax_value();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..SAMPLES * 20 {
        let policy = Policy::random_full_support(model.num_states(), model.num_actions(), rng);
        let d = occupancy_of_policy(model, &policy).map_err(|e| e.to_string())?;
        let (ratio, _) = max_ratio(&instance.weights, d.values()).map_err(|e| e.to_string())?;
        worst = worst.max((value - ratio) / value);
    }
    check(worst, 1e-9, "relative undercut")
}

fn lipschitz<R: Rng>(instance: &Instance, rng: &mut R) -> Outcome {
    let model = &instance.model;
    let eta = if instance.eta > 0.0 {
        instance.eta
    } else {
        auto_eta(model).map_err(|e| e.to_string())?
    };
    let polytope = build_polytope(model, eta).map_err(|e| e.to_string())?;
    let n = polytope.num_pairs();
    let mut vertices = Vec::new();
    for _ in 0..8 {
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let point = lp_maximize(&polytope, &c)
            .and_then(|s| s.into_point())
            .map_err(|e| e.to_string())?;
        vertices.push(point);
    }
    let sample = |rng: &mut R| {
        let w: Vec<f64> = (0..vertices.len())
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        let total: f64 = w.iter().sum();
        (0..n)
            .map(|i| {
                vertices
                    .iter()
                    .zip(&w)
                    .map(|(v, wj)| v[i] * wj / total)
                    .sum()
            })
            .collect::<Vec<f64>>()
    };
    let mut worst = 0.0f64;
    for &rho in &RHOS {
        let obj = RhoObjective::new(rho, instance.weights.clone()).map_err(|e| e.to_string())?;
        let bound = obj.smoothness_constant(eta).map_err(|e| e.to_string())?;
        for _ in 0..SAMPLES {
            let (d, e) = (sample(rng), sample(rng));
            let gd = obj.gradient(&d).map_err(|e| e.to_string())?;
            let ge = obj.gradient(&e).map_err(|e| e.to_string())?;
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
            if rhs > 0.0 {
                worst = worst.max(lhs / (bound * rhs));
            }
        }
    }
    check(worst, 1.0, "ratio to smoothness bound")
}

fn schedule_identities() -> Outcome {
    for tau1 in [1u64, 7, 50] {
        let schedule = make_schedule(tau1, 100).map_err(|e| e.to_string())?;
        for e in schedule.episodes() {
            let k = e.k;
            let ok = e.length == tau1 * k * k
                && e.start == tau1 * (k - 1) * k * (2 * k - 1) / 6 + 1
                && e.next_start == e.start + e.length
                && e.beta_exact() * k >= 1.into()
                && e.beta_exact() * k <= 3.into();
            if !ok {
                return Err(format!("tau1 {tau1}, episode {k}"));
            }
        }
    }
    Ok("300 episodes".into())
}
