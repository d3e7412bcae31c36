//! Command-line arguments, the JSON config file, and their resolution into a
//! [`RunConfig`].

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use rhocover_core::explorer::{FrankWolfeOptions, DEFAULT_EPSILON_COLD};
use rhocover_core::mdp::{random_ergodic_mdp, validate_mdp, MdpModel};
use rhocover_core::model_file::load_model;
use rhocover_core::objective::CoverageWeights;
use rhocover_core::polytope::auto_eta;

use crate::error::{io_error, CliError, Result};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_SWEEP_RHOS: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
pub const DEFAULT_RHO: f64 = 2.0;
pub const DEFAULT_TAU1: u64 = 50;
pub const DEFAULT_EPISODES: u64 = 40;
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_BURN_IN: usize = 9;

#[derive(Debug, Parser)]
#[command(
    name = "rhocover",
    version,
    about = "Weighted state-action coverage for tabular MDPs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random ergodic model and write it as JSON.
    GenMdp(GenArgs),
    /// Compute the optimal restricted occupancy for one rho.
    Solve(RunArgs),
    /// Run episodic exploration and write a per-episode trace.
    Explore(RunArgs),
    /// Solve for every rho in a list and compare against minimax coverage.
    SweepRho(RunArgs),
    /// Run the numerical property checks on an instance.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 5)]
    pub states: usize,
    #[arg(long, default_value_t = 3)]
    pub actions: usize,
    /// Dirichlet concentration of each transition row.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Weight of the uniform row mixed into every transition row.
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Coverage weights to embed in the file (`uniform` or a comma list).
    #[arg(long)]
    pub mu: Option<WeightsSpec>,
    /// Output file.
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

/// Flags shared by `solve`, `explore`, `sweep-rho` and `verify`. Anything left
/// unset falls back to the config file, then to the built-in default.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON config file (`"version": 1`); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model JSON file; when absent a model is generated.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// States of the generated model.
    #[arg(long)]
    pub states: Option<usize>,
    /// Actions of the generated model.
    #[arg(long)]
    pub actions: Option<usize>,
    /// Dirichlet concentration of the generated rows.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Uniform mixing weight of the generated rows.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Seed of the generated model.
    #[arg(long)]
    pub model_seed: Option<u64>,
    /// `uniform`, `model`, a comma list, or `file:<path>`.
    #[arg(long)]
    pub mu: Option<WeightsSpec>,
    /// One value, or a comma list for `sweep-rho`.
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    /// `auto` or an explicit value in `[0, 1/2)`.
    #[arg(long)]
    pub eta: Option<EtaSpec>,
    /// Length of the first episode; episode k runs tau1 * k^2 steps.
    #[arg(long)]
    pub tau1: Option<u64>,
    /// Number of episodes K.
    #[arg(long)]
    pub episodes: Option<u64>,
    /// Cold-start floor for visit counts.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Seed of the simulated environment and of randomized checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Iteration cap of the Frank-Wolfe comparator solve.
    #[arg(long)]
    pub fw_iterations: Option<usize>,
    /// Duality-gap tolerance of the Frank-Wolfe comparator solve.
    #[arg(long)]
    pub fw_tolerance: Option<f64>,
    /// Leading episodes left out of the rate fit.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Record wall-clock time per episode (makes traces non-reproducible).
    #[arg(long)]
    pub timing: bool,
    /// Append the empirical occupancy columns to the trace.
    #[arg(long)]
    pub include_dhat: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Relative tolerance of the finite-difference gradient check.
    #[arg(long, default_value_t = 1e-5)]
    pub fd_tolerance: f64,
}

/// Source of coverage weights.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightsSpec {
    Uniform,
    /// `mu` from the model file, uniform if it has none.
    Model,
    Explicit(Vec<f64>),
    File(PathBuf),
}

impl FromStr for WeightsSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match s {
            "uniform" => Ok(WeightsSpec::Uniform),
            "model" => Ok(WeightsSpec::Model),
            _ => {
                if let Some(path) = s.strip_prefix("file:") {
                    return Ok(WeightsSpec::File(PathBuf::from(path)));
                }
                s.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|e| format!("bad weight {x:?}: {e}"))
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map(WeightsSpec::Explicit)
            }
        }
    }
}

impl fmt::Display for WeightsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightsSpec::Uniform => write!(f, "uniform"),
            WeightsSpec::Model => write!(f, "model"),
            WeightsSpec::File(p) => write!(f, "file:{}", p.display()),
            WeightsSpec::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

impl Serialize for WeightsSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            WeightsSpec::Explicit(v) => v.serialize(serializer),
            other => serializer.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for WeightsSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            List(Vec<f64>),
            Nested(Vec<Vec<f64>>),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::List(v) => Ok(WeightsSpec::Explicit(v)),
            Repr::Nested(v) => Ok(WeightsSpec::Explicit(v.into_iter().flatten().collect())),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaSpec {
    Auto,
    Value(f64),
}

impl FromStr for EtaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "auto" => Ok(EtaSpec::Auto),
            other => other
                .parse::<f64>()
                .map(EtaSpec::Value)
                .map_err(|e| format!("eta must be `auto` or a number: {e}")),
        }
    }
}

impl Serialize for EtaSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            EtaSpec::Auto => serializer.serialize_str("auto"),
            EtaSpec::Value(v) => serializer.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for EtaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => Ok(EtaSpec::Value(v)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub states: usize,
    pub actions: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            states: 5,
            actions: 3,
            alpha: 1.0,
            lambda: 0.05,
            seed: DEFAULT_SEED,
        }
    }
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<MdpModel<f64>> {
        Ok(random_ergodic_mdp(
            self.states,
            self.actions,
            self.alpha,
            self.lambda,
            self.seed,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    File(PathBuf),
    Generated(GeneratorSpec),
}

/// Contents of a `--config` file. Every field but `version` is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: u32,
    pub model: Option<ModelSource>,
    pub mu: Option<WeightsSpec>,
    pub rho: Option<RhoList>,
    pub eta: Option<EtaSpec>,
    pub tau1: Option<u64>,
    pub episodes: Option<u64>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub fw_iterations: Option<usize>,
    pub fw_tolerance: Option<f64>,
    pub burn_in: Option<usize>,
    pub timing: Option<bool>,
    pub include_dhat: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RhoList {
    One(f64),
    Many(Vec<f64>),
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_error(path))?;
        let file: ConfigFile = serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if file.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }
}

/// Fully resolved settings of one command invocation; echoed into summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelSource,
    pub mu: WeightsSpec,
    pub rho: Vec<f64>,
    pub eta: EtaSpec,
    pub tau1: u64,
    pub episodes: u64,
    pub epsilon: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub fw_iterations: usize,
    pub fw_tolerance: f64,
    pub burn_in: usize,
    pub timing: bool,
    pub include_dhat: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSource::Generated(GeneratorSpec::default()),
            mu: WeightsSpec::Model,
            rho: vec![DEFAULT_RHO],
            eta: EtaSpec::Auto,
            tau1: DEFAULT_TAU1,
            episodes: DEFAULT_EPISODES,
            epsilon: DEFAULT_EPSILON_COLD,
            seed: DEFAULT_SEED,
            out: PathBuf::from("out"),
            fw_iterations: FrankWolfeOptions::default().max_iterations,
            fw_tolerance: FrankWolfeOptions::default().gap_tolerance,
            burn_in: DEFAULT_BURN_IN,
            timing: false,
            include_dhat: false,
        }
    }
}

impl RunConfig {
    /// Flags over config file over defaults; `default_rho` is the command's
    /// rho list when neither source sets one.
    pub fn resolve(args: &RunArgs, default_rho: &[f64]) -> Result<Self> {
        let mut file = match &args.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile {
                version: CONFIG_VERSION,
                ..ConfigFile::default()
            },
        };
        let model = match (&args.model, file.model.take()) {
            (Some(path), _) => ModelSource::File(path.clone()),
            (None, Some(ModelSource::File(path))) if !has_generator_flags(args) => {
                ModelSource::File(path)
            }
            (None, from_file) => {
                let base = match from_file {
                    Some(ModelSource::Generated(spec)) => spec,
                    _ => GeneratorSpec::default(),
                };
                ModelSource::Generated(GeneratorSpec {
                    states: args.states.unwrap_or(base.states),
                    actions: args.actions.unwrap_or(base.actions),
                    alpha: args.alpha.unwrap_or(base.alpha),
                    lambda: args.lambda.unwrap_or(base.lambda),
                    seed: args.model_seed.unwrap_or(base.seed),
                })
            }
        };
        Self::finish(args, model, file, RunConfig::default(), default_rho)
    }

    fn finish(
        args: &RunArgs,
        model: ModelSource,
        file: ConfigFile,
        defaults: RunConfig,
        default_rho: &[f64],
    ) -> Result<Self> {
        let rho = match (&args.rho, file.rho) {
            (Some(list), _) => list.clone(),
            (None, Some(RhoList::One(r))) => vec![r],
            (None, Some(RhoList::Many(list))) => list,
            (None, None) => default_rho.to_vec(),
        };
        if rho.is_empty() {
            return Err(CliError::Config("rho list is empty".into()));
        }
        if let Some(bad) = rho.iter().find(|r| !(**r >= 1.0 && r.is_finite())) {
            return Err(CliError::Config(format!(
                "rho must be a finite value >= 1, got {bad}"
            )));
        }
        let config = RunConfig {
            model,
            mu: args.mu.clone().or(file.mu).unwrap_or(defaults.mu),
            rho,
            eta: args.eta.or(file.eta).unwrap_or(defaults.eta),
            tau1: args.tau1.or(file.tau1).unwrap_or(defaults.tau1),
            episodes: args.episodes.or(file.episodes).unwrap_or(defaults.episodes),
            epsilon: args.epsilon.or(file.epsilon).unwrap_or(defaults.epsilon),
            seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
            out: args.out.clone().or(file.out).unwrap_or(defaults.out),
            fw_iterations: args
                .fw_iterations
                .or(file.fw_iterations)
                .unwrap_or(defaults.fw_iterations),
            fw_tolerance: args
                .fw_tolerance
                .or(file.fw_tolerance)
                .unwrap_or(defaults.fw_tolerance),
            burn_in: args.burn_in.or(file.burn_in).unwrap_or(defaults.burn_in),
            timing: args.timing || file.timing.unwrap_or(false),
            include_dhat: args.include_dhat || file.include_dhat.unwrap_or(false),
        };
        if !(config.epsilon > 0.0) {
            return Err(CliError::Config("epsilon must be positive".into()));
        }
        if config.tau1 == 0 || config.episodes == 0 {
            return Err(CliError::Config(
                "tau1 and episodes must be positive".into(),
            ));
        }
        Ok(config)
    }

    /// The single rho of `solve` and `explore`.
    pub fn single_rho(&self) -> Result<f64> {
        match self.rho.as_slice() {
            [rho] => Ok(*rho),
            _ => Err(CliError::Config(format!(
                "expected one rho value, got {}",
                self.rho.len()
            ))),
        }
    }

    pub fn frank_wolfe(&self) -> FrankWolfeOptions {
        FrankWolfeOptions {
            max_iterations: self.fw_iterations,
            gap_tolerance: self.fw_tolerance,
        }
    }

    /// Loads or generates the model, validates it, and resolves weights and eta.
    pub fn instance(&self) -> Result<Instance> {
        let (model, file_weights) = match &self.model {
            ModelSource::File(path) => load_model(path).map_err(|e| match e {
                rhocover_core::Error::Io(source) => CliError::Io {
                    path: path.clone(),
                    source,
                },
                other => other.into(),
            })?,
            ModelSource::Generated(spec) => (spec.generate()?, None),
        };
        validate_mdp(&model).into_result()?;
        let pairs = model.num_pairs();
        let weights = match &self.mu {
            WeightsSpec::Uniform => CoverageWeights::uniform(pairs),
            WeightsSpec::Model => file_weights.unwrap_or_else(|| CoverageWeights::uniform(pairs)),
            WeightsSpec::Explicit(values) => CoverageWeights::new(values.clone())?,
            WeightsSpec::File(path) => {
                let text = fs::read_to_string(path).map_err(io_error(path))?;
                match serde_json::from_str::<WeightsSpec>(&text) {
                    Ok(WeightsSpec::Explicit(values)) => CoverageWeights::new(values)?,
                    Ok(_) => {
                        return Err(CliError::Config(format!(
                            "{}: expected an array of weights",
                            path.display()
                        )))
                    }
                    Err(source) => {
                        return Err(CliError::Json {
                            path: path.clone(),
                            source,
                        })
                    }
                }
            }
        };
        if weights.len() != pairs {
            return Err(rhocover_core::Error::Dimension {
                what: "coverage weights",
                expected: pairs,
                found: weights.len(),
            }
            .into());
        }
        let eta = match self.eta {
            EtaSpec::Auto => auto_eta(&model)?,
            EtaSpec::Value(v) => v,
        };
        Ok(Instance {
            model,
            weights,
            eta,
        })
    }
}

fn has_generator_flags(args: &RunArgs) -> bool {
    args.states.is_some()
        || args.actions.is_some()
        || args.alpha.is_some()
        || args.lambda.is_some()
        || args.model_seed.is_some()
}

/// A validated model with its weights and restriction level.
#[derive(Debug, Clone)]
pub struct Instance {
    pub model: MdpModel<f64>,
    pub weights: CoverageWeights<f64>,
    pub eta: f64,
}
