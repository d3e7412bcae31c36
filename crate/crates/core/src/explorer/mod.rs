//! Coverage exploration: the episode schedule, the sampled episodic explorer,
//! the full-information comparator, and rate fitting.

mod exact;
mod rate;
mod run;
mod schedule;

pub use exact::{exact_solve, initial_point, ExactSolution, FrankWolfeOptions, SolveStatus};
pub use rate::{fit_rate, RateFit};
pub use run::{
    approximation_error, floored_estimate, run_exploration, EpisodeRecord, ExplorationConfig,
    ExplorationTrace, DEFAULT_EPSILON_COLD,
};
pub use schedule::{make_schedule, Episode, EpisodeSchedule};
