//! The game state machine: residents / mafia / detectives rounds, plurality
//! voting, adjudication and the three trusted-moderator primitives
//! (simultaneous broadcast, anonymous ballot, private channel).

mod alive;
mod ideal;
mod runner;
mod state;
mod tally;

use std::collections::BTreeMap;
use std::fmt;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use alive::AliveSet;
pub use ideal::{ideal_anonymous_ballot, ideal_simultaneous_broadcast, DeliveryReceipt, Transcript};
pub use runner::{run_game, run_game_recorded, Agent, BlocVote, DayContext, Outgoing, Profile, Seat, SeatKind};
pub use state::GameState;
pub use tally::{tally_plurality, tally_weighted, Votes};

/// Randomness source threaded explicitly through every engine and strategy call.
pub type GameRng = ChaCha8Rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("liveness violation: {0}")]
    Liveness(String),
    #[error("player {0} cannot receive messages")]
    Undeliverable(PlayerId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub usize);

impl PlayerId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Faction {
    Citizen,
    Mafia,
}

impl fmt::Display for Faction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Faction::Citizen => "citizens",
            Faction::Mafia => "mafia",
        })
    }
}

/// A player's secret role. Detectives are always citizens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Role {
    pub faction: Faction,
    pub is_detective: bool,
}

impl Role {
    pub const CITIZEN: Role = Role {
        faction: Faction::Citizen,
        is_detective: false,
    };
    pub const DETECTIVE: Role = Role {
        faction: Faction::Citizen,
        is_detective: true,
    };
    pub const MAFIA: Role = Role {
        faction: Faction::Mafia,
        is_detective: false,
    };

    pub fn is_mafia(self) -> bool {
        self.faction == Faction::Mafia
    }
}

/// How faithfully the day protocol is played out.
///
/// `Protocol` seats every player as an independent agent. `Reduced` seats
/// coalitions that share all their information (the mafia, the ordinary
/// citizens) as a single agent voting with the weight of its living members,
/// while detectives stay individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fidelity {
    Protocol,
    #[default]
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub residents: usize,
    pub mafia: usize,
    pub detectives: usize,
    /// Declare the mafia winner as soon as `2·M_t ≥ R_t`.
    pub adjudicate_majority: bool,
    pub fidelity: Fidelity,
    /// Private messages plus declarations a single player may issue per
    /// residents round.
    pub decision_budget: usize,
}

impl GameConfig {
    pub fn new(residents: usize, mafia: usize, detectives: usize) -> Result<Self, EngineError> {
        let config = Self {
            residents,
            mafia,
            detectives,
            adjudicate_majority: true,
            fidelity: Fidelity::default(),
            decision_budget: residents.max(1),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_fidelity(mut self, fidelity: Fidelity) -> Self {
        self.fidelity = fidelity;
        self
    }

    pub fn with_majority_adjudication(mut self, on: bool) -> Self {
        self.adjudicate_majority = on;
        self
    }

    pub fn with_decision_budget(mut self, budget: usize) -> Self {
        self.decision_budget = budget;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.residents == 0 {
            return Err(EngineError::Config("at least one player is required".into()));
        }
        if self.mafia + self.detectives > self.residents {
            return Err(EngineError::Config(format!(
                "mafia ({}) plus detectives ({}) exceed players ({})",
                self.mafia, self.detectives, self.residents
            )));
        }
        Ok(())
    }

    /// Mafia density `M0 / R0`.
    pub fn eta(&self) -> f64 {
        self.mafia as f64 / self.residents as f64
    }
}

/// Adjudication on bare counts; shared by the engine and the reduced chain.
pub fn adjudicate_counts(residents: usize, mafia: usize, majority: bool) -> Option<Faction> {
    if mafia == 0 {
        return (residents > 0).then_some(Faction::Citizen);
    }
    if mafia >= residents || (majority && 2 * mafia >= residents) {
        return Some(Faction::Mafia);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Residents,
    Mafia,
    Detectives,
    Terminated,
}

/// Public claims a player can make during the residents round. Each one is
/// a claim to be a detective together with a request to be eliminated so the
/// claim can be verified by the role reveal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "claim", rename_all = "snake_case")]
pub enum Declaration {
    RequestElimination,
    RevealMafia { block: usize, mafia: Vec<PlayerId> },
    PublishCitizens { roster: Vec<PlayerId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PublicEvent {
    DayElimination {
        player: PlayerId,
        faction: Faction,
        detective: bool,
    },
    NightElimination {
        player: PlayerId,
        detective: bool,
    },
    Announcement {
        player: PlayerId,
        number: u64,
    },
    Declaration {
        player: PlayerId,
        payload: Declaration,
    },
    BallotResult {
        target: PlayerId,
    },
}

impl PublicEvent {
    /// The eliminated player and whether the reveal showed a detective.
    pub fn elimination(&self) -> Option<(PlayerId, bool)> {
        match *self {
            PublicEvent::DayElimination { player, detective, .. }
            | PublicEvent::NightElimination { player, detective } => Some((player, detective)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Roster { members: Vec<PlayerId> },
    Target { player: PlayerId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivateMessage {
    pub from: PlayerId,
    pub round: usize,
    pub payload: Payload,
}

/// The only public trace of private traffic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageCounts {
    pub sent: usize,
    pub received: usize,
}

/// Counts announced to every player before the game starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CommonKnowledge {
    pub residents: usize,
    pub mafia: usize,
    pub detectives: usize,
    pub adjudicate_majority: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", content = "entries", rename_all = "snake_case")]
pub enum PrivateKnowledge<'a> {
    None,
    MafiaRoster(&'a [PlayerId]),
    Detective(&'a BTreeMap<PlayerId, Faction>),
}

/// Everything one player is entitled to see.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct View<'a> {
    pub self_id: PlayerId,
    pub self_role: Role,
    pub round: usize,
    pub phase: Phase,
    pub common: CommonKnowledge,
    pub alive: &'a AliveSet,
    pub public_log: &'a [PublicEvent],
    pub private: PrivateKnowledge<'a>,
    pub inbox: &'a [PrivateMessage],
    pub message_counts: &'a [MessageCounts],
}

impl View<'_> {
    pub fn residents_alive(&self) -> usize {
        self.alive.len()
    }

    pub fn mafia_roster(&self) -> Option<&[PlayerId]> {
        match self.private {
            PrivateKnowledge::MafiaRoster(roster) => Some(roster),
            _ => None,
        }
    }

    pub fn detective_knowledge(&self) -> Option<&BTreeMap<PlayerId, Faction>> {
        match self.private {
            PrivateKnowledge::Detective(known) => Some(known),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: usize,
    #[serde(rename = "R")]
    pub residents: usize,
    #[serde(rename = "M")]
    pub mafia: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub winner: Faction,
    pub rounds: usize,
    pub forfeited: bool,
    pub trajectory: Vec<TrajectoryPoint>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_overfull_roles() {
        assert!(matches!(GameConfig::new(5, 3, 3), Err(EngineError::Config(_))));
        assert!(matches!(GameConfig::new(0, 0, 0), Err(EngineError::Config(_))));
        let config = GameConfig::new(10, 3, 1).unwrap();
        assert!((config.eta() * 10.0 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn adjudication_rules() {
        assert_eq!(adjudicate_counts(2, 1, true), Some(Faction::Mafia));
        assert_eq!(adjudicate_counts(2, 1, false), None);
        assert_eq!(adjudicate_counts(4, 0, true), Some(Faction::Citizen));
        assert_eq!(adjudicate_counts(5, 2, true), None);
        assert_eq!(adjudicate_counts(3, 3, false), Some(Faction::Mafia));
    }

    #[test]
    fn outcome_json_field_names() {
        let outcome = GameOutcome {
            winner: Faction::Mafia,
            rounds: 1,
            forfeited: false,
            trajectory: vec![TrajectoryPoint {
                t: 0,
                residents: 3,
                mafia: 1,
            }],
        };
        let json = serde_json::to_string(&outcome).unwrap();
        assert_eq!(
            json,
            r#"{"winner":"mafia","rounds":1,"forfeited":false,"trajectory":[{"t":0,"R":3,"M":1}]}"#
        );
    }
}
