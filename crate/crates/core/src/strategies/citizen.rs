use crate::engine::{Agent, BlocVote, DayContext, GameRng, Outgoing, Payload, PlayerId, PrivateMessage, View};

use super::agenda::PublicAgenda;
use super::random_sum::{citizen_random_sum, random_sum_target, uniform_living_outside};

/// Open-vote choice shared by every honest seat: the public agenda first,
/// then the anonymous ballot's winner, then the random sum.
pub(crate) fn honest_vote(agenda: Option<&mut PublicAgenda>, view: &View<'_>, day: &DayContext<'_>) -> PlayerId {
    if let Some(agenda) = agenda {
        agenda.update(view);
        if let Some(target) = agenda.directed_target(view) {
            return target;
        }
    }
    day.ballot_winner
        .unwrap_or_else(|| random_sum_target(view.alive, day.transcript))
}

#[derive(Debug, Clone)]
struct Vigilantes {
    sender: PlayerId,
    members: Vec<PlayerId>,
    leader_cursor: usize,
    target: Option<(usize, PlayerId)>,
}

impl Vigilantes {
    fn leader(&mut self, view: &View<'_>) -> Option<PlayerId> {
        while self.leader_cursor < self.members.len() && !view.alive.contains(self.members[self.leader_cursor]) {
            self.leader_cursor += 1;
        }
        self.members.get(self.leader_cursor).copied()
    }

    fn alive(&self, view: &View<'_>) -> usize {
        self.members[self.leader_cursor..]
            .iter()
            .filter(|p| view.alive.contains(**p))
            .count()
    }
}

/// An ordinary citizen seat: either one player or, in reduced fidelity, all
/// ordinary citizens voting together.
pub struct CitizenAgent {
    agenda: Option<PublicAgenda>,
    own: Option<PlayerId>,
    forfeits_early: bool,
    vigilantes: Option<Vigilantes>,
}

impl CitizenAgent {
    /// Plain random-sum player that ignores declarations.
    pub fn baseline() -> Self {
        Self {
            agenda: None,
            own: None,
            forfeits_early: false,
            vigilantes: None,
        }
    }

    /// Follows public claims and, if it holds a detective's roster, the
    /// vigilante protocol. `own` is the seat's single player, or `None` for
    /// a bloc of every ordinary citizen. `staged` enables the concession
    /// rules of the single-detective strategy.
    pub fn informed(own: Option<PlayerId>, staged: bool) -> Self {
        Self {
            agenda: Some(PublicAgenda::new()),
            own,
            forfeits_early: staged,
            vigilantes: None,
        }
    }

    fn active_vigilantes(&mut self, view: &View<'_>) -> Option<&mut Vigilantes> {
        let agenda = self.agenda.as_mut()?;
        agenda.update(view);
        let sender = agenda.vigilante_sender()?;
        self.vigilantes.as_mut().filter(|v| v.sender == sender)
    }
}

impl Agent for CitizenAgent {
    fn forfeits(&mut self, view: &View<'_>) -> bool {
        if !self.forfeits_early {
            return false;
        }
        let Some(agenda) = self.agenda.as_mut() else {
            return false;
        };
        agenda.update(view);
        let Some(sender) = agenda.vigilante_sender() else {
            return agenda.undeclared_detective_died();
        };
        let mafia = agenda.mafia_alive(view);
        match self.vigilantes.as_mut() {
            Some(v) if v.sender == sender => {
                v.leader(view);
                v.alive(view) <= mafia
            }
            // An empty roster is visible to everyone through the send count.
            _ => view.message_counts[sender.index()].sent == 0,
        }
    }

    fn private_sends(&mut self, view: &View<'_>, rng: &mut GameRng) -> Vec<Outgoing> {
        let Some(me) = self.own else { return Vec::new() };
        let Some(vigilantes) = self.active_vigilantes(view) else {
            return Vec::new();
        };
        if vigilantes.leader(view) != Some(me) {
            return Vec::new();
        }
        let Some(k) = uniform_living_outside(view.alive, &vigilantes.members, rng) else {
            return Vec::new();
        };
        vigilantes.target = Some((view.round, k));
        vigilantes.members[vigilantes.leader_cursor + 1..]
            .iter()
            .filter(|p| view.alive.contains(**p))
            .map(|&to| Outgoing {
                from: me,
                to,
                payload: Payload::Target { player: k },
            })
            .collect()
    }

    fn receive(&mut self, _to: PlayerId, message: &PrivateMessage) {
        match &message.payload {
            Payload::Roster { members } => {
                if self.vigilantes.is_none() {
                    let mut members = members.clone();
                    members.sort_unstable();
                    self.vigilantes = Some(Vigilantes {
                        sender: message.from,
                        members,
                        leader_cursor: 0,
                        target: None,
                    });
                }
            }
            Payload::Target { player } => {
                if let Some(v) = self.vigilantes.as_mut() {
                    if v.members.binary_search(&message.from).is_ok() {
                        v.target = Some((message.round, *player));
                    }
                }
            }
        }
    }

    fn announce(&mut self, view: &View<'_>, rng: &mut GameRng) -> Option<u64> {
        Some(citizen_random_sum(view, rng))
    }

    fn ballot(&mut self, view: &View<'_>, rng: &mut GameRng) -> Vec<(PlayerId, usize)> {
        let own = self.own;
        let Some(vigilantes) = self.active_vigilantes(view) else {
            return Vec::new();
        };
        vigilantes.leader(view);
        match own {
            None => {
                let weight = vigilantes.alive(view);
                match uniform_living_outside(view.alive, &vigilantes.members, rng) {
                    Some(k) if weight > 0 => vec![(k, weight)],
                    _ => Vec::new(),
                }
            }
            Some(me) => {
                if vigilantes.members.binary_search(&me).is_err() {
                    return Vec::new();
                }
                match vigilantes.target {
                    Some((round, k)) if round == view.round && view.alive.contains(k) => vec![(k, 1)],
                    _ => Vec::new(),
                }
            }
        }
    }

    fn vote(&mut self, view: &View<'_>, day: &DayContext<'_>, _rng: &mut GameRng) -> BlocVote {
        BlocVote::Unanimous(honest_vote(self.agenda.as_mut(), view, day))
    }
}
