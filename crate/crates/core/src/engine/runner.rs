use std::collections::BTreeMap;

use rand::SeedableRng;

use super::ideal::{ideal_simultaneous_broadcast, Transcript};
use super::tally::{tally_weighted, Votes};
use super::{
    Declaration, EngineError, Faction, Fidelity, GameConfig, GameOutcome, GameRng, GameState, Payload, PlayerId,
    PrivateMessage, TrajectoryPoint, View,
};

/// Which coalition a seat speaks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeatKind {
    Citizens,
    Mafia,
    Detective,
}

/// What a profile sees when asked to seat an agent: the coalition kind, the
/// seating mode and the view of the seat's first member.
pub struct Seat<'a> {
    pub kind: SeatKind,
    pub fidelity: Fidelity,
    pub view: View<'a>,
}

/// A named family of decision procedures, one per seat kind.
pub trait Profile: Sync {
    fn name(&self) -> &str;
    fn spawn(&self, seat: &Seat<'_>, rng: &mut GameRng) -> Result<Box<dyn Agent>, EngineError>;
}

/// Day vote of a seat. `Unanimous` casts the vote of every living member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlocVote {
    Unanimous(PlayerId),
    Split(Vec<(PlayerId, usize)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub from: PlayerId,
    pub to: PlayerId,
    pub payload: Payload,
}

/// Public results of the current day available when the open vote is cast.
#[derive(Debug, Clone, Copy)]
pub struct DayContext<'a> {
    pub transcript: &'a Transcript,
    pub ballot_winner: Option<PlayerId>,
}

/// Decision procedure for one seat. Every call receives the view of the
/// seat's representative (its lowest-id living member) and nothing else;
/// private messages addressed to any member arrive through `receive`.
pub trait Agent: Send {
    /// Asked at the start of every residents round; `true` concedes the game.
    fn forfeits(&mut self, _view: &View<'_>) -> bool {
        false
    }

    fn declare(&mut self, _view: &View<'_>, _rng: &mut GameRng) -> Option<Declaration> {
        None
    }

    fn private_sends(&mut self, _view: &View<'_>, _rng: &mut GameRng) -> Vec<Outgoing> {
        Vec::new()
    }

    fn receive(&mut self, _to: PlayerId, _message: &PrivateMessage) {}

    /// Contribution to the simultaneous broadcast; `None` stays silent.
    fn announce(&mut self, _view: &View<'_>, _rng: &mut GameRng) -> Option<u64> {
        None
    }

    /// Anonymous ballot entries as `(target, voters)`; empty abstains.
    fn ballot(&mut self, _view: &View<'_>, _rng: &mut GameRng) -> Vec<(PlayerId, usize)> {
        Vec::new()
    }

    fn vote(&mut self, view: &View<'_>, day: &DayContext<'_>, rng: &mut GameRng) -> BlocVote;

    /// Consulted on the mafia seat holding the lowest-id living mafia member.
    fn night_target(&mut self, _view: &View<'_>, _rng: &mut GameRng) -> Option<PlayerId> {
        None
    }

    fn query(&mut self, _view: &View<'_>, _rng: &mut GameRng) -> Option<PlayerId> {
        None
    }
}

struct Slot {
    kind: SeatKind,
    members: Vec<PlayerId>,
    alive: usize,
    first_alive: usize,
    agent: Box<dyn Agent>,
}

impl Slot {
    fn representative(&mut self, state: &GameState) -> Option<PlayerId> {
        while self.first_alive < self.members.len() && !state.alive().contains(self.members[self.first_alive]) {
            self.first_alive += 1;
        }
        self.members.get(self.first_alive).copied()
    }
}

struct Table {
    slots: Vec<Slot>,
    seat_of: Vec<usize>,
}

impl Table {
    fn seat(state: &GameState, profile: &dyn Profile, rng: &mut GameRng) -> Result<Self, EngineError> {
        let config = state.config();
        let kind_of = |p: PlayerId| {
            let role = state.role(p).expect("dealt");
            if role.is_mafia() {
                SeatKind::Mafia
            } else if role.is_detective {
                SeatKind::Detective
            } else {
                SeatKind::Citizens
            }
        };
        let mut groups: Vec<(SeatKind, Vec<PlayerId>)> = Vec::new();
        match config.fidelity {
            Fidelity::Protocol => {
                for p in state.alive().iter() {
                    groups.push((kind_of(p), vec![p]));
                }
            }
            Fidelity::Reduced => {
                let mut mafia = Vec::new();
                let mut citizens = Vec::new();
                for p in state.alive().iter() {
                    match kind_of(p) {
                        SeatKind::Mafia => mafia.push(p),
                        SeatKind::Citizens => citizens.push(p),
                        SeatKind::Detective => groups.push((SeatKind::Detective, vec![p])),
                    }
                }
                if !mafia.is_empty() {
                    groups.push((SeatKind::Mafia, mafia));
                }
                if !citizens.is_empty() {
                    groups.push((SeatKind::Citizens, citizens));
                }
                groups.sort_by_key(|(_, members)| members[0]);
            }
        }

        let mut seat_of = vec![usize::MAX; config.residents];
        let mut slots = Vec::with_capacity(groups.len());
        for (index, (kind, members)) in groups.into_iter().enumerate() {
            for m in &members {
                seat_of[m.index()] = index;
            }
            let seat = Seat {
                kind,
                fidelity: config.fidelity,
                view: state.view(members[0])?,
            };
            let agent = profile.spawn(&seat, rng)?;
            slots.push(Slot {
                kind,
                alive: members.len(),
                members,
                first_alive: 0,
                agent,
            });
        }
        Ok(Self { slots, seat_of })
    }

    fn eliminated(&mut self, player: PlayerId) {
        let slot = &mut self.slots[self.seat_of[player.index()]];
        slot.alive -= 1;
    }
}

fn point(state: &GameState, t: usize) -> TrajectoryPoint {
    TrajectoryPoint {
        t,
        residents: state.residents_alive(),
        mafia: state.mafia_alive(),
    }
}

/// Plays one game to adjudication (or forfeit). The outcome is a pure
/// function of `(config, profile, seed)`.
pub fn run_game(config: &GameConfig, profile: &dyn Profile, seed: u64) -> Result<GameOutcome, EngineError> {
    run_game_recorded(config, profile, seed).map(|(outcome, _)| outcome)
}

/// [`run_game`] that also hands back the final state, public log included.
pub fn run_game_recorded(
    config: &GameConfig,
    profile: &dyn Profile,
    seed: u64,
) -> Result<(GameOutcome, GameState), EngineError> {
    let mut rng = GameRng::seed_from_u64(seed);
    let mut state = GameState::deal(config, &mut rng)?;
    let mut table = Table::seat(&state, profile, &mut rng)?;
    let mut trajectory = Vec::new();
    let mut rounds = 0usize;

    while state.settle().is_none() {
        trajectory.push(point(&state, state.round()));
        if residents_phase(&mut state, &mut table, &mut rng)? {
            break;
        }
        rounds += 1;
        if state.winner().is_some() {
            break;
        }
        mafia_phase(&mut state, &mut table, &mut rng)?;
        if state.winner().is_some() {
            break;
        }
        detectives_phase(&mut state, &mut table, &mut rng)?;
    }

    let last = point(&state, rounds);
    if trajectory.last().map(|p| (p.residents, p.mafia)) != Some((last.residents, last.mafia)) {
        trajectory.push(last);
    }
    let outcome = GameOutcome {
        winner: state.winner().unwrap_or(Faction::Mafia),
        rounds,
        forfeited: state.forfeited(),
        trajectory,
    };
    Ok((outcome, state))
}

/// Returns `true` when the citizens conceded before voting.
fn residents_phase(state: &mut GameState, table: &mut Table, rng: &mut GameRng) -> Result<bool, EngineError> {
    let budget = state.config().decision_budget;

    for slot in table.slots.iter_mut() {
        let Some(rep) = slot.representative(state) else {
            continue;
        };
        if slot.agent.forfeits(&state.view(rep)?) {
            state.forfeit();
            return Ok(true);
        }
    }

    let mut spent = vec![0usize; table.slots.len()];
    for (index, slot) in table.slots.iter_mut().enumerate() {
        let Some(rep) = slot.representative(state) else {
            continue;
        };
        if let Some(payload) = slot.agent.declare(&state.view(rep)?, rng) {
            state.declare(rep, payload)?;
            spent[index] += 1;
        }
    }

    let mut mail: Vec<(usize, Outgoing)> = Vec::new();
    for (index, slot) in table.slots.iter_mut().enumerate() {
        let Some(rep) = slot.representative(state) else {
            continue;
        };
        let outgoing = slot.agent.private_sends(&state.view(rep)?, rng);
        spent[index] += outgoing.len();
        if spent[index] > budget * slot.alive {
            return Err(EngineError::Liveness(format!(
                "seat of {rep} issued {} messages and declarations, budget is {}",
                spent[index],
                budget * slot.alive
            )));
        }
        mail.extend(outgoing.into_iter().map(|o| (index, o)));
    }
    for (index, message) in mail {
        if table.seat_of.get(message.from.index()) != Some(&index) {
            return Err(EngineError::Protocol(format!(
                "seat cannot send on behalf of {}",
                message.from
            )));
        }
        state.ideal_private_send(message.from, message.to, message.payload.clone())?;
        let delivered = PrivateMessage {
            from: message.from,
            round: state.round(),
            payload: message.payload,
        };
        let recipient = table.seat_of[message.to.index()];
        table.slots[recipient].agent.receive(message.to, &delivered);
    }

    let mut announcements = BTreeMap::new();
    for slot in table.slots.iter_mut() {
        let Some(rep) = slot.representative(state) else {
            continue;
        };
        if let Some(value) = slot.agent.announce(&state.view(rep)?, rng) {
            announcements.insert(rep, value);
        }
    }
    let transcript = ideal_simultaneous_broadcast(&announcements, state.alive())?;
    state.record_announcements(&transcript);

    let mut ballot: Vec<(PlayerId, usize)> = Vec::new();
    for slot in table.slots.iter_mut() {
        let Some(rep) = slot.representative(state) else {
            continue;
        };
        let entries = slot.agent.ballot(&state.view(rep)?, rng);
        let weight: usize = entries.iter().map(|(_, w)| w).sum();
        if weight > slot.alive {
            return Err(EngineError::Protocol(format!(
                "seat of {rep} cast {weight} secret ballots for {} members",
                slot.alive
            )));
        }
        ballot.extend(entries);
    }
    let ballot_winner = if ballot.iter().any(|(_, w)| *w > 0) {
        let winner = tally_weighted(&ballot, state.alive(), rng)?;
        state.record_ballot_result(winner);
        Some(winner)
    } else {
        None
    };

    let day = DayContext {
        transcript: &transcript,
        ballot_winner,
    };
    let mut votes = Votes::new();
    for slot in table.slots.iter_mut() {
        let Some(rep) = slot.representative(state) else {
            continue;
        };
        match slot.agent.vote(&state.view(rep)?, &day, rng) {
            BlocVote::Unanimous(target) => votes.cast(target, slot.alive),
            BlocVote::Split(entries) => {
                let weight: usize = entries.iter().map(|(_, w)| w).sum();
                if weight != slot.alive {
                    return Err(EngineError::Protocol(format!(
                        "seat of {rep} cast {weight} votes for {} members",
                        slot.alive
                    )));
                }
                for (target, w) in entries {
                    votes.cast(target, w);
                }
            }
        }
    }
    let eliminated = state.residents_round(&votes, rng)?;
    table.eliminated(eliminated);
    Ok(false)
}

fn mafia_phase(state: &mut GameState, table: &mut Table, rng: &mut GameRng) -> Result<(), EngineError> {
    let speaker = table
        .slots
        .iter_mut()
        .filter(|s| s.kind == SeatKind::Mafia && s.alive > 0)
        .filter_map(|s| s.representative(state).map(|rep| (rep, s)))
        .min_by_key(|(rep, _)| *rep);
    let Some((rep, slot)) = speaker else {
        return Err(EngineError::Protocol("no mafia member left to act at night".into()));
    };
    let target = slot
        .agent
        .night_target(&state.view(rep)?, rng)
        .ok_or_else(|| EngineError::Protocol("the mafia did not choose a victim".into()))?;
    state.mafia_round(target)?;
    table.eliminated(target);
    Ok(())
}

fn detectives_phase(state: &mut GameState, table: &mut Table, rng: &mut GameRng) -> Result<(), EngineError> {
    let mut queries = BTreeMap::new();
    for slot in table.slots.iter_mut().filter(|s| s.kind == SeatKind::Detective) {
        let Some(rep) = slot.representative(state) else {
            continue;
        };
        if let Some(target) = slot.agent.query(&state.view(rep)?, rng) {
            queries.insert(rep, target);
        }
    }
    state.detectives_round(&queries)
}
