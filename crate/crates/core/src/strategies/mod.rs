//! Decision procedures for every seat, bundled into named profiles.

mod agenda;
mod citizen;
mod detective;
mod mafia;
mod random_sum;

use serde::{Deserialize, Serialize};

use crate::engine::{Agent, EngineError, Fidelity, GameRng, Profile, Seat, SeatKind};

pub use agenda::PublicAgenda;
pub use citizen::CitizenAgent;
pub use detective::{
    stage1_len, NoCryptoDetective, PartitionDetective, PartitionScenarioParams, Stage, StagedDetective,
    StagedDetectiveState,
};
pub use mafia::MafiaAgent;
pub use random_sum::{
    citizen_random_sum, mafia_shadow_vote, mafia_uniform_night, random_sum_rank, random_sum_target,
    uniform_living_outside,
};

pub const PROFILE_NAMES: [&str; 4] = [
    "baseline-no-detective",
    "staged-detective",
    "partition-detective",
    "nocrypto-detective",
];

/// Tunables read by the profiles that need them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub d: usize,
    pub delta: f64,
}

impl Default for ProfileParams {
    fn default() -> Self {
        Self { d: 10, delta: 0.45 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    Baseline,
    Staged,
    Partition { d: usize, delta: f64 },
    NoCrypto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    kind: ProfileKind,
}

impl StrategyProfile {
    pub fn new(kind: ProfileKind) -> Self {
        Self { kind }
    }

    pub fn by_name(name: &str, params: &ProfileParams) -> Result<Self, EngineError> {
        let kind = match name {
            "baseline-no-detective" => ProfileKind::Baseline,
            "staged-detective" => ProfileKind::Staged,
            "partition-detective" => ProfileKind::Partition {
                d: params.d,
                delta: params.delta,
            },
            "nocrypto-detective" => ProfileKind::NoCrypto,
            other => {
                return Err(EngineError::Config(format!(
                    "unknown profile {other:?}; expected one of {}",
                    PROFILE_NAMES.join(", ")
                )))
            }
        };
        Ok(Self { kind })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// Checks the profile's requirements on the initial counts.
    pub fn check(&self, residents: usize, mafia: usize, detectives: usize) -> Result<(), EngineError> {
        match self.kind {
            ProfileKind::Baseline => Ok(()),
            ProfileKind::Staged | ProfileKind::NoCrypto if detectives == 0 => Err(EngineError::Config(format!(
                "{} needs at least one detective",
                self.name()
            ))),
            ProfileKind::Staged if detectives > 1 => Err(EngineError::Config(
                "staged-detective is defined for a single detective".into(),
            )),
            ProfileKind::Staged | ProfileKind::NoCrypto => Ok(()),
            ProfileKind::Partition { d, delta } => {
                PartitionScenarioParams::new(d, delta, residents, mafia)?;
                if detectives < d * d {
                    return Err(EngineError::Config(format!(
                        "partition-detective needs at least d^2 = {} detectives, got {detectives}",
                        d * d
                    )));
                }
                Ok(())
            }
        }
    }
}

impl Profile for StrategyProfile {
    fn name(&self) -> &str {
        match self.kind {
            ProfileKind::Baseline => PROFILE_NAMES[0],
            ProfileKind::Staged => PROFILE_NAMES[1],
            ProfileKind::Partition { .. } => PROFILE_NAMES[2],
            ProfileKind::NoCrypto => PROFILE_NAMES[3],
        }
    }

    fn spawn(&self, seat: &Seat<'_>, rng: &mut GameRng) -> Result<Box<dyn Agent>, EngineError> {
        let view = &seat.view;
        let protocol = seat.fidelity == Fidelity::Protocol;
        let own = protocol.then_some(view.self_id);
        let informed = self.kind != ProfileKind::Baseline;
        Ok(match (seat.kind, self.kind) {
            (SeatKind::Mafia, _) => Box::new(MafiaAgent::new(informed, !protocol)),
            (SeatKind::Citizens, ProfileKind::Baseline) => Box::new(CitizenAgent::baseline()),
            (SeatKind::Citizens, kind) => Box::new(CitizenAgent::informed(own, kind == ProfileKind::Staged)),
            // A detective under the baseline profile plays as a plain citizen.
            (SeatKind::Detective, ProfileKind::Baseline) => Box::new(CitizenAgent::baseline()),
            (SeatKind::Detective, ProfileKind::Staged) => Box::new(StagedDetective::new(view, protocol, rng)),
            (SeatKind::Detective, ProfileKind::Partition { d, delta }) => {
                let params = PartitionScenarioParams::new(d, delta, view.common.residents, view.common.mafia)?;
                Box::new(PartitionDetective::new(view, &params, protocol, rng))
            }
            (SeatKind::Detective, ProfileKind::NoCrypto) => Box::new(NoCryptoDetective::new(view, protocol)),
        })
    }
}
