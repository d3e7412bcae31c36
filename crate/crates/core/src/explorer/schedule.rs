//! Quadratically growing episode lengths `tau_k = tau_1 k^2`.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One episode of the schedule. Times are 1-based: episode `k` covers steps
/// `start .. next_start - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Episode {
    pub k: u64,
    /// `tau_k`
    pub length: u64,
    /// `t_k = tau_1 (k-1) k (2k-1) / 6 + 1`
    pub start: u64,
    /// `t_{k+1} = t_k + tau_k`
    pub next_start: u64,
}

impl Episode {
    /// Mixing weight `beta_k = tau_k / (t_{k+1} - 1)` as an exact fraction.
    pub fn beta_exact(&self) -> Ratio<u64> {
        Ratio::new(self.length, self.next_start - 1)
    }

    pub fn beta<T: Scalar>(&self) -> T {
        T::from_u64(self.length).expect("length") / T::from_u64(self.next_start - 1).expect("time")
    }

    /// Steps recorded once the episode has finished.
    pub fn steps_after(&self) -> u64 {
        self.next_start - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeSchedule {
    tau1: u64,
    episodes: Vec<Episode>,
}

impl EpisodeSchedule {
    pub fn new(tau1: u64, num_episodes: u64) -> Result<Self> {
        if tau1 == 0 {
            return Err(Error::Parameter("tau1 must be at least 1".into()));
        }
        if num_episodes == 0 {
            return Err(Error::Parameter("need at least one episode".into()));
        }
        let episodes = (1..=num_episodes)
            .map(|k| {
                let overflow = || Error::ScheduleOverflow { episode: k };
                let length = k
                    .checked_mul(k)
                    .and_then(|k2| k2.checked_mul(tau1))
                    .ok_or_else(overflow)?;
                let start = start_time(tau1, k).ok_or_else(overflow)?;
                let next_start = start.checked_add(length).ok_or_else(overflow)?;
                Ok(Episode {
                    k,
                    length,
                    start,
                    next_start,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { tau1, episodes })
    }

    pub fn tau1(&self) -> u64 {
        self.tau1
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn total_steps(&self) -> u64 {
        self.episodes.last().map_or(0, Episode::steps_after)
    }
}

/// `t_k` in 128-bit arithmetic, `None` if it does not fit in `u64`.
fn start_time(tau1: u64, k: u64) -> Option<u64> {
    let k = u128::from(k);
    let sum_sq = (k - 1) * k * (2 * k - 1) / 6;
    let t = u128::from(tau1).checked_mul(sum_sq)?.checked_add(1)?;
    u64::try_from(t).ok()
}

/// Builds the exact schedule for `num_episodes` episodes.
pub fn make_schedule(tau1: u64, num_episodes: u64) -> Result<EpisodeSchedule> {
    EpisodeSchedule::new(tau1, num_episodes)
}
