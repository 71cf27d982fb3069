use rand::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::engine::GameRng;

/// Default master seed used whenever none is given.
pub const DEFAULT_SEED: u64 = 20_090_527;

/// Generator owned by trial `index`: ChaCha8 keyed by the master seed, on
/// stream `index`. Streams never overlap, so trials are independent and
/// each one is reproducible on its own.
pub fn trial_rng(master_seed: u64, index: u64) -> GameRng {
    let mut rng = GameRng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// 64-bit game seed for trial `index`: the first word of [`trial_rng`].
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    trial_rng(master_seed, index).next_u64()
}

/// Tallies that merge by addition, so the merge order cannot matter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub mafia_wins: u64,
    pub forfeits: u64,
}

impl Tally {
    pub fn one(mafia_won: bool, forfeited: bool) -> Self {
        Self {
            trials: 1,
            mafia_wins: u64::from(mafia_won),
            forfeits: u64::from(forfeited),
        }
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            trials: self.trials + other.trials,
            mafia_wins: self.mafia_wins + other.mafia_wins,
            forfeits: self.forfeits + other.forfeits,
        }
    }
}

/// Runs `f` over `0..n` on `workers` threads (0 means all cores) and
/// returns the results in index order.
pub fn parallel_map<T, F>(n: u64, workers: usize, f: F) -> Result<Vec<T>, ExperimentError>
where
    T: Send,
    F: Fn(u64) -> Result<T, ExperimentError> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExperimentError::Usage(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Sums per-trial tallies on `workers` threads.
pub fn parallel_tally<F>(trials: u64, workers: usize, f: F) -> Result<Tally, ExperimentError>
where
    F: Fn(u64) -> Result<Tally, ExperimentError> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExperimentError::Usage(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(&f)
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
    })
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `wins` successes in `trials`.
pub fn wilson_interval(wins: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = wins as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// Monte Carlo estimate of the mafia's win probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub trials: u64,
    pub wins: u64,
    pub phat: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
    pub forfeits: u64,
}

impl EstimateResult {
    pub fn from_tally(tally: Tally, master_seed: u64) -> Self {
        let n = tally.trials.max(1) as f64;
        let phat = tally.mafia_wins as f64 / n;
        let (ci_low, ci_high) = wilson_interval(tally.mafia_wins, tally.trials, Z95);
        Self {
            trials: tally.trials,
            wins: tally.mafia_wins,
            phat,
            stderr: (phat * (1.0 - phat) / n).sqrt(),
            ci_low,
            ci_high,
            master_seed,
            forfeits: tally.forfeits,
        }
    }

    pub fn citizen_rate(&self) -> f64 {
        1.0 - self.phat
    }

    pub fn forfeit_rate(&self) -> f64 {
        self.forfeits as f64 / self.trials.max(1) as f64
    }
}
