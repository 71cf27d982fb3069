use std::collections::BTreeMap;

use rand::Rng;

use super::{AliveSet, EngineError, GameRng, PlayerId};

/// Open day votes, aggregated as `(target, weight)` pairs. A weight above
/// one stands for that many voters casting the same vote.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Votes {
    entries: Vec<(PlayerId, usize)>,
}

impl Votes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cast(&mut self, target: PlayerId, weight: usize) {
        if weight > 0 {
            self.entries.push((target, weight));
        }
    }

    /// One vote per voter; voters must be alive.
    pub fn from_ballots(ballots: &BTreeMap<PlayerId, PlayerId>, alive: &AliveSet) -> Result<Self, EngineError> {
        let mut votes = Votes::new();
        for (&voter, &target) in ballots {
            if !alive.contains(voter) {
                return Err(EngineError::Protocol(format!("{voter} is not alive and cannot vote")));
            }
            votes.cast(target, 1);
        }
        Ok(votes)
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    pub fn entries(&self) -> &[(PlayerId, usize)] {
        &self.entries
    }
}

/// Plurality over one-vote-per-voter ballots, ties broken uniformly.
pub fn tally_plurality(
    votes: &BTreeMap<PlayerId, PlayerId>,
    alive: &AliveSet,
    rng: &mut GameRng,
) -> Result<PlayerId, EngineError> {
    let votes = Votes::from_ballots(votes, alive)?;
    tally_weighted(votes.entries(), alive, rng)
}

/// Plurality over weighted votes; the winner is drawn uniformly from the
/// argmax set, listed in increasing id order.
pub fn tally_weighted(
    entries: &[(PlayerId, usize)],
    alive: &AliveSet,
    rng: &mut GameRng,
) -> Result<PlayerId, EngineError> {
    if entries.iter().all(|(_, w)| *w == 0) {
        return Err(EngineError::Protocol("every resident is required to vote".into()));
    }
    if let Some((target, _)) = entries.iter().find(|(t, _)| !alive.contains(*t)) {
        return Err(EngineError::Protocol(format!("vote for {target}, who is not alive")));
    }

    let mut counts: Vec<(PlayerId, usize)> = entries.to_vec();
    counts.sort_unstable_by_key(|(t, _)| *t);
    let mut merged: Vec<(PlayerId, usize)> = Vec::with_capacity(counts.len());
    for (target, weight) in counts {
        match merged.last_mut() {
            Some((last, acc)) if *last == target => *acc += weight,
            _ => merged.push((target, weight)),
        }
    }
    let best = merged.iter().map(|(_, w)| *w).max().unwrap_or(0);
    let leaders: Vec<PlayerId> = merged.into_iter().filter(|(_, w)| *w == best).map(|(t, _)| t).collect();
    Ok(match leaders.len() {
        1 => leaders[0],
        n => leaders[rng.random_range(0..n)],
    })
}
