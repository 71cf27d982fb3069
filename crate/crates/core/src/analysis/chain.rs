//! Direct sampling of the reduced `(R, M)` chain.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::engine::{adjudicate_counts, Faction, GameRng};

/// `r` eliminations per cycle, the first `d` of them by day vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundPattern {
    pub r: usize,
    pub d: usize,
}

impl Default for RoundPattern {
    fn default() -> Self {
        Self { r: 2, d: 1 }
    }
}

impl RoundPattern {
    pub fn new(r: usize, d: usize) -> Result<Self, AnalysisError> {
        if d == 0 || r <= d {
            return Err(AnalysisError::Domain(format!("pattern needs r > d >= 1, got {r}:{d}")));
        }
        Ok(Self { r, d })
    }
}

impl std::str::FromStr for RoundPattern {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (r, d) = s
            .split_once(':')
            .ok_or_else(|| AnalysisError::Domain(format!("pattern must look like r:d, got {s:?}")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| AnalysisError::Domain(format!("pattern must look like r:d, got {s:?}")))
        };
        Self::new(parse(r)?, parse(d)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainPoint {
    pub t: usize,
    #[serde(rename = "R")]
    pub residents: usize,
    #[serde(rename = "M")]
    pub mafia: usize,
    #[serde(rename = "X")]
    pub x: f64,
}

impl ChainPoint {
    fn at(t: usize, residents: usize, mafia: usize) -> Self {
        let x = if residents == 0 {
            0.0
        } else {
            (mafia as f64) * (mafia.saturating_sub(1) as f64) / residents as f64
        };
        Self { t, residents, mafia, x }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedOutcome {
    pub winner: Faction,
    pub rounds: usize,
    pub trajectory: Vec<ChainPoint>,
}

/// One day step: a uniform resident is removed, mafia with probability `M/R`.
#[inline]
fn day_step(residents: usize, mafia: &mut usize, rng: &mut GameRng) {
    if rng.random_range(0..residents) < *mafia {
        *mafia -= 1;
    }
}

/// Samples the chain from `(r, m)` and records `(t, R_t, M_t, X_t)` at the
/// start of every cycle plus the absorbing position.
pub fn simulate_reduced_with(
    r: usize,
    m: usize,
    rng: &mut GameRng,
    pattern: RoundPattern,
    majority: bool,
) -> Result<ReducedOutcome, AnalysisError> {
    if m > r || r == 0 {
        return Err(AnalysisError::Domain(format!(
            "need 0 <= M <= R and R >= 1, got ({r}, {m})"
        )));
    }
    let (mut residents, mut mafia) = (r, m);
    let mut trajectory = Vec::with_capacity(r / pattern.r + 2);
    let mut t = 0;
    let winner = 'game: loop {
        if let Some(w) = adjudicate_counts(residents, mafia, majority) {
            break 'game w;
        }
        trajectory.push(ChainPoint::at(t, residents, mafia));
        t += 1;
        for step in 0..pattern.r {
            if step < pattern.d {
                day_step(residents, &mut mafia, rng);
            }
            residents -= 1;
            if let Some(w) = adjudicate_counts(residents, mafia, majority) {
                break 'game w;
            }
        }
    };
    let last = ChainPoint::at(t, residents, mafia);
    if trajectory.last().map(|p| (p.residents, p.mafia)) != Some((residents, mafia)) {
        trajectory.push(last);
    }
    Ok(ReducedOutcome {
        winner,
        rounds: t,
        trajectory,
    })
}

pub fn simulate_reduced(r: usize, m: usize, seed: u64, pattern: RoundPattern) -> Result<ReducedOutcome, AnalysisError> {
    let mut rng = GameRng::seed_from_u64(seed);
    simulate_reduced_with(r, m, &mut rng, pattern, true)
}

/// Winner only, without recording the path.
pub fn sample_reduced_winner(r: usize, m: usize, rng: &mut GameRng, majority: bool) -> Faction {
    let (mut residents, mut mafia) = (r, m);
    loop {
        if let Some(w) = adjudicate_counts(residents, mafia, majority) {
            return w;
        }
        day_step(residents, &mut mafia, rng);
        residents -= 1;
        if let Some(w) = adjudicate_counts(residents, mafia, majority) {
            return w;
        }
        residents -= 1;
    }
}
