//! The `gen-mdp`, `solve`, `explore` and `sweep-rho` commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rhocover_core::explorer::{
    approximation_error, exact_solve, fit_rate, run_exploration, ExactSolution, ExplorationConfig,
    ExplorationTrace, SolveStatus,
};
use rhocover_core::mdp::{random_ergodic_mdp, validate_mdp, MdpModel};
use rhocover_core::model_file::ModelFile;
use rhocover_core::objective::{max_ratio, CoverageWeights, RhoObjective};
use rhocover_core::occupancy::{occupancy_of_policy, policy_of_occupancy};
use rhocover_core::polytope::minimax_occupancy;

use crate::config::{GenArgs, Instance, RunConfig, WeightsSpec};
use crate::error::{io_error, CliError, Result};

pub const TRACE_FILE: &str = "trace.csv";
pub const EXPLORE_SUMMARY_FILE: &str = "summary.json";
pub const SOLVE_SUMMARY_FILE: &str = "solve.json";
pub const SWEEP_DIR: &str = "sweep";
pub const SWEEP_TABLE_FILE: &str = "sweep.csv";
pub const SWEEP_SUMMARY_FILE: &str = "sweep.json";

/// Writes a generated model (and optional weights) to `args.out`.
///
/// `--states 1` yields the single-state model, whose occupancy polytope is the
/// action simplex.
pub fn gen_mdp(args: &GenArgs) -> Result<ModelFile> {
    // a single state has only the trivial kernel; the generator needs two
    let model = if args.states == 1 {
        MdpModel::new(1, args.actions, vec![1.0; args.actions])?
    } else {
        random_ergodic_mdp(
            args.states,
            args.actions,
            args.alpha,
            args.lambda,
            args.seed,
        )?
    };
    validate_mdp(&model).into_result()?;
    let weights = match &args.mu {
        None => None,
        Some(WeightsSpec::Uniform) => Some(CoverageWeights::uniform(model.num_pairs())),
        Some(WeightsSpec::Explicit(values)) => {
            if values.len() != model.num_pairs() {
                return Err(CliError::Config(format!(
                    "expected {} weights, got {}",
                    model.num_pairs(),
                    values.len()
                )));
            }
            Some(CoverageWeights::new(values.clone())?)
        }
        Some(other) => {
            return Err(CliError::Config(format!(
                "gen-mdp accepts `uniform` or a weight list, not {other}"
            )))
        }
    };
    let file = ModelFile::from_model(&model, weights.as_ref());
    write_text(&args.out, &file.to_json()?)?;
    Ok(file)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub rho: f64,
    pub eta: f64,
    pub weights: Vec<f64>,
    pub d_star: Vec<f64>,
    /// `pi(a|s)` row-major.
    pub policy: Vec<f64>,
    pub value: f64,
    /// `None` when the gap overflows.
    pub fw_gap: Option<f64>,
    pub fw_iterations: usize,
    pub converged: bool,
    pub max_ratio: f64,
    pub minimax_value: f64,
    /// Optimum over the unrestricted polytope.
    pub unrestricted_value: f64,
    /// Largest deviation between `d_star` and the occupancy of `policy`.
    pub policy_occupancy_error: f64,
}

#[derive(Debug, Clone, Serialize)]
struct Echo<'a, T> {
    config: &'a RunConfig,
    #[serde(flatten)]
    result: &'a T,
}

pub fn solve(config: &RunConfig) -> Result<SolveSummary> {
    let instance = config.instance()?;
    let summary = solve_instance(&instance, config.single_rho()?, config)?;
    write_json(
        &config.out.join(SOLVE_SUMMARY_FILE),
        &Echo {
            config,
            result: &summary,
        },
    )?;
    Ok(summary)
}

fn solve_instance(instance: &Instance, rho: f64, config: &RunConfig) -> Result<SolveSummary> {
    let Instance {
        model,
        weights,
        eta,
    } = instance;
    let objective = RhoObjective::new(rho, weights.clone())?;
    let solution = exact_solve(model, &objective, *eta, config.frank_wolfe())?;
    let unrestricted = exact_solve(model, &objective, 0.0, config.frank_wolfe())?;
    let policy = policy_of_occupancy(&solution.occupancy, model.num_states(), model.num_actions())?;
    let reevaluated = occupancy_of_policy(model, &policy)?;
    let policy_occupancy_error = solution
        .occupancy
        .iter()
        .zip(reevaluated.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let minimax = minimax_occupancy(model, weights, *eta)?;
    Ok(SolveSummary {
        rho,
        eta: *eta,
        weights: weights.values().to_vec(),
        max_ratio: max_ratio(weights, &solution.occupancy)?.0,
        policy: policy.probs().to_vec(),
        value: solution.value,
        fw_gap: finite(solution.gap),
        fw_iterations: solution.iterations,
        converged: solution.status == SolveStatus::Converged,
        d_star: solution.occupancy,
        minimax_value: minimax.minimax_value(),
        unrestricted_value: unrestricted.value,
        policy_occupancy_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreSummary {
    pub num_states: usize,
    pub num_actions: usize,
    pub rho: f64,
    pub eta: f64,
    pub weights: Vec<f64>,
    pub u_star: f64,
    pub u_star_unrestricted: f64,
    pub d_star: Vec<f64>,
    /// `None` when the gap overflows.
    pub fw_gap: Option<f64>,
    pub total_steps: u64,
    pub final_counts: Vec<u64>,
    pub final_d_hat: Vec<f64>,
    pub final_xi: f64,
    pub final_max_ratio: f64,
    /// Least-squares slope of `ln xi` against `ln` of the steps taken, after burn-in.
    pub fitted_slope: Option<f64>,
    pub fit_points: usize,
    /// Episodes (1-based) after burn-in left out of the fit because `xi <= 0`.
    pub fit_excluded: Vec<u64>,
    pub minimax_value: f64,
    /// First episode with every `d_hat` entry at least `eta`.
    pub k_delta: Option<u64>,
}

/// Output of [`explore`]: the summary, the trace CSV text and the per-episode errors.
#[derive(Debug, Clone)]
pub struct ExploreOutput {
    pub summary: ExploreSummary,
    pub trace_csv: String,
    pub xi: Vec<f64>,
    pub trace: ExplorationTrace<f64>,
}

pub fn explore(config: &RunConfig) -> Result<ExploreOutput> {
    let instance = config.instance()?;
    let output = explore_instance(&instance, config)?;
    write_text(&config.out.join(TRACE_FILE), &output.trace_csv)?;
    write_json(
        &config.out.join(EXPLORE_SUMMARY_FILE),
        &Echo {
            config,
            result: &output.summary,
        },
    )?;
    Ok(output)
}

pub fn explore_instance(instance: &Instance, config: &RunConfig) -> Result<ExploreOutput> {
    let Instance {
        model,
        weights,
        eta,
    } = instance;
    let rho = config.single_rho()?;
    let exploration = ExplorationConfig {
        rho,
        weights: weights.clone(),
        eta: *eta,
        tau1: config.tau1,
        episodes: config.episodes,
        epsilon_cold: config.epsilon,
        seed: config.seed,
        initial_state: 0,
    };
    let objective = exploration.objective()?;
    let trace = run_exploration(model, &exploration)?;
    let star = exact_solve(model, &objective, *eta, config.frank_wolfe())?;
    let unrestricted = exact_solve(model, &objective, 0.0, config.frank_wolfe())?;
    let xi = approximation_error(&trace, &star.occupancy, &objective)?;
    let minimax = minimax_occupancy(model, weights, *eta)?;

    let steps: Vec<f64> = trace.records.iter().map(|r| r.steps as f64).collect();
    let (fitted_slope, fit_points, fit_excluded) = match fit_rate(&steps, &xi, config.burn_in) {
        Ok(fit) => (
            Some(fit.slope),
            fit.used,
            fit.excluded.iter().map(|&i| i as u64 + 1).collect(),
        ),
        Err(_) => (None, 0, Vec::new()),
    };
    let last = trace.records.last().expect("at least one episode");
    let summary = ExploreSummary {
        num_states: model.num_states(),
        num_actions: model.num_actions(),
        rho,
        eta: *eta,
        weights: weights.values().to_vec(),
        u_star: star.value,
        u_star_unrestricted: unrestricted.value,
        fw_gap: finite(star.gap),
        total_steps: last.steps,
        final_counts: last.counts.clone(),
        final_d_hat: last.d_hat.clone(),
        final_xi: *xi.last().expect("at least one episode"),
        final_max_ratio: last.max_ratio,
        fitted_slope,
        fit_points,
        fit_excluded,
        minimax_value: minimax.minimax_value(),
        k_delta: trace.k_delta,
        d_star: star.occupancy.clone(),
    };
    let trace_csv = trace_csv(&trace, &xi, &star, config.include_dhat, config.timing);
    Ok(ExploreOutput {
        summary,
        trace_csv,
        xi,
        trace,
    })
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Full-precision number for CSV output (17 significant digits).
pub fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

pub const TRACE_COLUMNS: [&str; 10] = [
    "k",
    "t_k",
    "tau_k",
    "beta_k",
    "U_hat",
    "U_star",
    "xi_k",
    "max_ratio",
    "lp_value",
    "wall_ms",
];

/// One row per episode. `wall_ms` is written as zero unless `timing` is set,
/// so that identical runs produce identical files.
pub fn trace_csv(
    trace: &ExplorationTrace<f64>,
    xi: &[f64],
    star: &ExactSolution<f64>,
    include_dhat: bool,
    timing: bool,
) -> String {
    let mut out = TRACE_COLUMNS.join(",");
    if include_dhat {
        for s in 0..trace.num_states {
            for a in 0..trace.num_actions {
                write!(out, ",d_{s}_{a}").expect("write to string");
            }
        }
    }
    out.push('\n');
    for (record, &xi_k) in trace.records.iter().zip(xi) {
        let wall_ms = if timing { record.wall_ms } else { 0.0 };
        let fields = [
            record.k.to_string(),
            record.start.to_string(),
            record.length.to_string(),
            fmt_full(record.beta),
            fmt_full(record.u_hat),
            fmt_full(star.value),
            fmt_full(xi_k),
            fmt_full(record.max_ratio),
            fmt_full(record.lp_value),
            fmt_full(wall_ms),
        ];
        out.push_str(&fields.join(","));
        if include_dhat {
            for &x in &record.d_hat {
                out.push(',');
                out.push_str(&fmt_full(x));
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub max_ratio: f64,
    /// Row-major index of the pair attaining `max_ratio`.
    pub argmax: usize,
    /// `max_ratio - minimax_value`.
    pub gap_to_minimax: f64,
    pub value: f64,
    /// `None` when the gap overflows.
    pub fw_gap: Option<f64>,
    pub fw_iterations: usize,
    pub converged: bool,
    pub d_star: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub eta: f64,
    pub weights: Vec<f64>,
    pub minimax_value: f64,
    pub minimax_occupancy: Vec<f64>,
    /// Sorted by rho.
    pub rows: Vec<SweepRow>,
}

/// Solves every rho in parallel, writing one file per rho, then merges them
/// into a table sorted by rho.
pub fn sweep_rho(config: &RunConfig) -> Result<SweepSummary> {
    let instance = config.instance()?;
    let Instance {
        model,
        weights,
        eta,
    } = &instance;
    let minimax = minimax_occupancy(model, weights, *eta)?;
    let minimax_value = minimax.minimax_value();
    let dir = config.out.join(SWEEP_DIR);
    fs::create_dir_all(&dir).map_err(io_error(&dir))?;

    let files: Vec<PathBuf> = config
        .rho
        .par_iter()
        .enumerate()
        .map(|(i, &rho)| -> Result<PathBuf> {
            let objective = RhoObjective::new(rho, weights.clone())?;
            let solution = exact_solve(model, &objective, *eta, config.frank_wolfe())?;
            let (ratio, argmax) = max_ratio(weights, &solution.occupancy)?;
            let row = SweepRow {
                rho,
                max_ratio: ratio,
                argmax,
                gap_to_minimax: ratio - minimax_value,
                value: solution.value,
                fw_gap: finite(solution.gap),
                fw_iterations: solution.iterations,
                converged: solution.status == SolveStatus::Converged,
                d_star: solution.occupancy,
            };
            let path = dir.join(format!("rho_{i:03}.json"));
            write_json(&path, &row)?;
            Ok(path)
        })
        .collect::<Result<_>>()?;

    let mut rows = files
        .iter()
        .map(|path| read_json::<SweepRow>(path))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.rho.total_cmp(&b.rho));

    let summary = SweepSummary {
        eta: *eta,
        weights: weights.values().to_vec(),
        minimax_value,
        minimax_occupancy: minimax.occupancy,
        rows,
    };
    write_text(&config.out.join(SWEEP_TABLE_FILE), &sweep_table(&summary))?;
    write_json(
        &config.out.join(SWEEP_SUMMARY_FILE),
        &Echo {
            config,
            result: &summary,
        },
    )?;
    Ok(summary)
}

pub fn sweep_table(summary: &SweepSummary) -> String {
    let mut out =
        String::from("rho,max_ratio,minimax_value,gap_to_minimax,U_star,fw_gap,converged\n");
    for row in &summary.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_full(row.rho),
            fmt_full(row.max_ratio),
            fmt_full(summary.minimax_value),
            fmt_full(row.gap_to_minimax),
            fmt_full(row.value),
            row.fw_gap.map_or_else(|| "inf".to_string(), fmt_full),
            row.converged
        )
        .expect("write to string");
    }
    out
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_error(parent))?;
    }
    fs::write(path, text).map_err(io_error(path))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_text(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}
