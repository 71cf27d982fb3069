use rand::Rng;

use crate::engine::{AliveSet, EngineError, GameRng, PlayerId, Transcript, View};

const REJECTION_TRIES: usize = 64;

/// A uniform number in `[0, R_t − 1]` for the simultaneous broadcast.
pub fn citizen_random_sum(view: &View<'_>, rng: &mut GameRng) -> u64 {
    let residents = view.residents_alive().max(1);
    rng.random_range(0..residents as u64)
}

/// 1-based rank `1 + (Σ n(s) mod R_t)` selected by a broadcast.
pub fn random_sum_rank(transcript: &Transcript, residents: usize) -> usize {
    1 + transcript.sum_mod(residents as u64) as usize
}

/// The living resident holding the rank selected by the broadcast, ranks
/// counted over living ids in increasing order.
pub fn random_sum_target(alive: &AliveSet, transcript: &Transcript) -> PlayerId {
    let rank = random_sum_rank(transcript, alive.len());
    alive.nth(rank - 1).expect("rank lies within the living residents")
}

/// The mafia's day vote: follow the broadcast exactly like a citizen would.
pub fn mafia_shadow_vote(view: &View<'_>, transcript: &Transcript) -> PlayerId {
    random_sum_target(view.alive, transcript)
}

/// Uniform draw from living residents not in `excluded` (sorted). Rejection
/// sampling with an exhaustive fallback, so the draw is exactly uniform.
pub fn uniform_living_outside(alive: &AliveSet, excluded: &[PlayerId], rng: &mut GameRng) -> Option<PlayerId> {
    let n = alive.len();
    if n == 0 {
        return None;
    }
    for _ in 0..REJECTION_TRIES {
        let candidate = alive.nth(rng.random_range(0..n)).expect("rank in range");
        if excluded.binary_search(&candidate).is_err() {
            return Some(candidate);
        }
    }
    let eligible: Vec<PlayerId> = alive.iter().filter(|p| excluded.binary_search(p).is_err()).collect();
    if eligible.is_empty() {
        None
    } else {
        Some(eligible[rng.random_range(0..eligible.len())])
    }
}

/// Night victim drawn uniformly from the living citizens.
pub fn mafia_uniform_night(view: &View<'_>, rng: &mut GameRng) -> Result<PlayerId, EngineError> {
    let roster = view
        .mafia_roster()
        .ok_or_else(|| EngineError::Protocol(format!("{} is not a mafia member", view.self_id)))?;
    uniform_living_outside(view.alive, roster, rng)
        .ok_or_else(|| EngineError::Protocol("no citizen is left to eliminate".into()))
}
