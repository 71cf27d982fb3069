//! Seeded, parallel Monte Carlo experiments: win-probability sweeps, the
//! half-probability threshold, trajectories of the reduced chain, detective
//! scenarios and protocol/reduced cross-validation.

mod harness;
mod output;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    float_threshold, sample_reduced_winner, simulate_reduced_with, AnalysisError, ChainPoint, RoundPattern,
};
use crate::engine::{run_game, EngineError, Faction, Fidelity, GameConfig};
use crate::strategies::{ProfileKind, ProfileParams, StrategyProfile};

pub use harness::{
    parallel_map, parallel_tally, trial_rng, trial_seed, wilson_interval, EstimateResult, Tally, DEFAULT_SEED, Z95,
};
pub use output::{
    dp_table_rows, format_sig15, render, render_json, write_atomic, DpRow, OutputFormat, SweepRow, ThresholdRow,
    TrajectoryRow, ARTIFACT_VERSION,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Estimates the mafia's win probability under `profile` over `trials`
/// games. The baseline profile under reduced fidelity samples the reduced
/// chain directly, which has the same law as the bloc game.
pub fn estimate(
    config: &GameConfig,
    profile: &str,
    params: &ProfileParams,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<EstimateResult, ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::Usage("trials must be at least 1".into()));
    }
    config.validate()?;
    let profile = StrategyProfile::by_name(profile, params)?;
    profile.check(config.residents, config.mafia, config.detectives)?;
    let tally = if profile.kind() == ProfileKind::Baseline && config.fidelity == Fidelity::Reduced {
        let (r, m, majority) = (config.residents, config.mafia, config.adjudicate_majority);
        parallel_tally(trials, workers, |i| {
            let mut rng = trial_rng(master_seed, i);
            Ok(Tally::one(
                sample_reduced_winner(r, m, &mut rng, majority) == Faction::Mafia,
                false,
            ))
        })?
    } else {
        parallel_tally(trials, workers, |i| {
            let out = run_game(config, &profile, trial_seed(master_seed, i))?;
            Ok(Tally::one(out.winner == Faction::Mafia, out.forfeited))
        })?
    };
    Ok(EstimateResult::from_tally(tally, master_seed))
}

/// `M = round(η√R)`.
pub fn mafia_for_eta(residents: usize, eta: f64) -> Result<usize, ExperimentError> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(ExperimentError::Usage(format!(
            "eta must be a nonnegative number, got {eta}"
        )));
    }
    let m = (eta * (residents as f64).sqrt()).round() as usize;
    if m > residents / 2 {
        return Err(ExperimentError::Usage(format!(
            "eta = {eta} gives M = {m} above R/2 = {}",
            residents / 2
        )));
    }
    Ok(m)
}

/// One baseline estimate per `η`, each from the same master seed.
pub fn sweep_eta(
    residents: usize,
    eta_grid: &[f64],
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<SweepRow>, ExperimentError> {
    let ms = eta_grid
        .iter()
        .map(|&eta| mafia_for_eta(residents, eta))
        .collect::<Result<Vec<_>, _>>()?;
    eta_grid
        .iter()
        .zip(ms)
        .map(|(&eta, m)| {
            let config = GameConfig::new(residents, m, 0)?;
            let est = estimate(
                &config,
                "baseline-no-detective",
                &ProfileParams::default(),
                trials,
                master_seed,
                workers,
            )?;
            Ok(SweepRow::new(eta, residents, m, &est))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    ExactDp,
    MonteCarlo,
}

impl std::str::FromStr for ThresholdMethod {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" | "exact_dp" => Ok(Self::ExactDp),
            "mc" | "monte_carlo" => Ok(Self::MonteCarlo),
            other => Err(ExperimentError::Usage(format!(
                "unknown method {other:?}; expected exact or mc"
            ))),
        }
    }
}

impl std::fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ExactDp => "exact_dp",
            Self::MonteCarlo => "monte_carlo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    #[serde(rename = "R")]
    pub residents: usize,
    #[serde(rename = "M_half")]
    pub m_half: usize,
    pub method: ThresholdMethod,
}

/// Trials per Monte Carlo probe when the caller asks for fewer.
pub const MIN_PROBE_TRIALS: u64 = 2000;

/// Smallest `M` whose mafia-win probability reaches `1/2`. The exact method
/// scans the DP; the Monte Carlo method bisects on `M`, one estimate per
/// probe, relying on monotonicity in `M`.
pub fn threshold(
    residents: usize,
    method: ThresholdMethod,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<ThresholdPoint, ExperimentError> {
    if residents < 4 {
        return Err(ExperimentError::Usage(format!(
            "threshold needs R >= 4, got {residents}"
        )));
    }
    let m_half = match method {
        ThresholdMethod::ExactDp => float_threshold(residents, true),
        ThresholdMethod::MonteCarlo => {
            let trials = trials.max(MIN_PROBE_TRIALS);
            // Invariant: the answer lies in [lo, hi]; M = R/2 + 1 wins outright.
            let (mut lo, mut hi) = (1, residents / 2 + 1);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                let config = GameConfig::new(residents, mid, 0)?;
                let probe_seed = trial_seed(master_seed, mid as u64);
                let est = estimate(
                    &config,
                    "baseline-no-detective",
                    &ProfileParams::default(),
                    trials,
                    probe_seed,
                    workers,
                )?;
                if est.phat >= 0.5 {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            lo
        }
    };
    Ok(ThresholdPoint {
        residents,
        m_half,
        method,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficient: f64,
    pub exponent: f64,
    /// Sum of squared residuals in log space.
    pub residual: f64,
}

/// Least squares of `log M_half` on `log R`, giving `M_half ≈ c·R^a`.
pub fn fit_power_law(points: &[ThresholdPoint]) -> Result<FitResult, ExperimentError> {
    if points.len() < 3 {
        return Err(ExperimentError::Usage(format!(
            "a power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let mut rs: Vec<usize> = points.iter().map(|p| p.residents).collect();
    rs.sort_unstable();
    if rs.windows(2).any(|w| w[0] == w[1]) {
        return Err(ExperimentError::Usage("power-law fit needs distinct R values".into()));
    }
    if points.iter().any(|p| p.m_half == 0) {
        return Err(ExperimentError::Usage("power-law fit needs M_half >= 1".into()));
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| ((p.residents as f64).ln(), (p.m_half as f64).ln()))
        .collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = xy
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum::<f64>()
        .max(0.0);
    Ok(FitResult {
        coefficient: intercept.exp(),
        exponent,
        residual,
    })
}

/// Lengths of the tail windows reported next to each full trajectory.
pub const TAIL_WINDOWS: [usize; 2] = [10_000, 100];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRun {
    pub run: usize,
    pub winner: Faction,
    pub points: Vec<ChainPoint>,
}

impl TrajectoryRun {
    /// The last `len` points, or all of them for a shorter run.
    pub fn tail(&self, len: usize) -> &[ChainPoint] {
        &self.points[self.points.len().saturating_sub(len)..]
    }
}

/// `runs` independent paths of the reduced chain from `(R, M)`.
pub fn trajectories(
    residents: usize,
    mafia: usize,
    runs: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<TrajectoryRun>, ExperimentError> {
    if runs == 0 {
        return Err(ExperimentError::Usage("runs must be at least 1".into()));
    }
    parallel_map(runs as u64, workers, |i| {
        let mut rng = trial_rng(master_seed, i);
        let out = simulate_reduced_with(residents, mafia, &mut rng, RoundPattern::default(), true)?;
        Ok(TrajectoryRun {
            run: i as usize,
            winner: out.winner,
            points: out.trajectory,
        })
    })
}

pub const SCENARIO_NAMES: [&str; 3] = ["staged-detective", "partition-detective", "nocrypto-detective"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub profile: String,
    #[serde(rename = "R")]
    pub residents: usize,
    #[serde(rename = "M")]
    pub mafia: usize,
    #[serde(rename = "D")]
    pub detectives: usize,
    pub mafia_win_rate: f64,
    pub citizen_win_rate: f64,
    pub forfeit_rate: f64,
    pub estimate: EstimateResult,
}

/// Runs one of the detective profiles.
pub fn scenario(
    name: &str,
    config: &GameConfig,
    params: &ProfileParams,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<ScenarioResult, ExperimentError> {
    if !SCENARIO_NAMES.contains(&name) {
        return Err(EngineError::Config(format!(
            "unknown scenario {name:?}; expected one of {}",
            SCENARIO_NAMES.join(", ")
        ))
        .into());
    }
    let est = estimate(config, name, params, trials, master_seed, workers)?;
    Ok(ScenarioResult {
        profile: name.into(),
        residents: config.residents,
        mafia: config.mafia,
        detectives: config.detectives,
        mafia_win_rate: est.phat,
        citizen_win_rate: est.citizen_rate(),
        forfeit_rate: est.forfeit_rate(),
        estimate: est,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    #[serde(rename = "R")]
    pub residents: usize,
    #[serde(rename = "M")]
    pub mafia: usize,
    pub protocol: EstimateResult,
    pub reduced: EstimateResult,
    pub difference: f64,
    pub combined_stderr: f64,
    pub consistent: bool,
}

/// Plays the full protocol engine (announcements, ballots, tie-breaks) and
/// samples the reduced chain with equal trial counts.
pub fn crossvalidate(
    residents: usize,
    mafia: usize,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<CrossValidation, ExperimentError> {
    let params = ProfileParams::default();
    let base = GameConfig::new(residents, mafia, 0)?;
    let protocol = estimate(
        &base.clone().with_fidelity(Fidelity::Protocol),
        "baseline-no-detective",
        &params,
        trials,
        master_seed,
        workers,
    )?;
    let reduced = estimate(
        &base.with_fidelity(Fidelity::Reduced),
        "baseline-no-detective",
        &params,
        trials,
        trial_seed(master_seed, u64::MAX),
        workers,
    )?;
    let difference = (protocol.phat - reduced.phat).abs();
    let combined_stderr = protocol.stderr.hypot(reduced.stderr);
    Ok(CrossValidation {
        residents,
        mafia,
        difference,
        combined_stderr,
        consistent: difference <= 4.0 * combined_stderr,
        protocol,
        reduced,
    })
}
