//! Trusted-moderator stand-ins for the cryptographic primitives the citizens
//! rely on.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{AliveSet, EngineError, PlayerId};

/// Result of one simultaneous broadcast. Players that stayed silent are not
/// stored and read as 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Transcript {
    entries: Vec<(PlayerId, u64)>,
    #[serde(skip)]
    total: u128,
}

impl Transcript {
    pub fn value(&self, player: PlayerId) -> u64 {
        self.entries
            .binary_search_by_key(&player, |(p, _)| *p)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Explicit contributions in increasing id order.
    pub fn entries(&self) -> &[(PlayerId, u64)] {
        &self.entries
    }

    /// One value per living player in increasing id order, silent ones as 0.
    pub fn canonical(&self, alive: &AliveSet) -> Vec<(PlayerId, u64)> {
        alive.iter().map(|p| (p, self.value(p))).collect()
    }

    /// `Σ values mod modulus`.
    pub fn sum_mod(&self, modulus: u64) -> u64 {
        if modulus == 0 {
            return 0;
        }
        (self.total % u128::from(modulus)) as u64
    }
}

/// Collects every message first and reveals them together, so no sender can
/// condition on another sender's value.
pub fn ideal_simultaneous_broadcast(
    messages: &BTreeMap<PlayerId, u64>,
    alive: &AliveSet,
) -> Result<Transcript, EngineError> {
    if let Some(dead) = messages.keys().find(|p| !alive.contains(**p)) {
        return Err(EngineError::Protocol(format!(
            "{dead} is not alive and cannot broadcast"
        )));
    }
    Ok(Transcript {
        entries: messages.iter().map(|(p, v)| (*p, *v)).collect(),
        total: messages.values().map(|v| u128::from(*v)).sum(),
    })
}

/// Anonymous ballot: only the multiset of targets survives, abstentions drop out.
pub fn ideal_anonymous_ballot(votes: &BTreeMap<PlayerId, Option<PlayerId>>) -> BTreeMap<PlayerId, usize> {
    let mut counts = BTreeMap::new();
    for target in votes.values().flatten() {
        *counts.entry(*target).or_insert(0) += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeliveryReceipt {
    pub from: PlayerId,
    pub to: PlayerId,
    pub round: usize,
}
