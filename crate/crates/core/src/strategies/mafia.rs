use crate::engine::{Agent, BlocVote, DayContext, GameRng, PlayerId, View};

use super::agenda::PublicAgenda;
use super::citizen::honest_vote;
use super::random_sum::{citizen_random_sum, mafia_uniform_night};

/// The mafia seat: indistinguishable from citizens by day, uniform night
/// kills, and in a vigilante ballot all its weight on one likely roster
/// member.
pub struct MafiaAgent {
    agenda: Option<PublicAgenda>,
    bloc: bool,
    ballot_targets: Option<Vec<PlayerId>>,
    ballot_cursor: usize,
}

impl MafiaAgent {
    /// `bloc` seats every mafia member as one agent.
    pub fn new(informed: bool, bloc: bool) -> Self {
        Self {
            agenda: informed.then(PublicAgenda::new),
            bloc,
            ballot_targets: None,
            ballot_cursor: 0,
        }
    }
}

impl Agent for MafiaAgent {
    fn announce(&mut self, view: &View<'_>, rng: &mut GameRng) -> Option<u64> {
        Some(citizen_random_sum(view, rng))
    }

    /// Roster members are the only residents that received private messages
    /// when the vigilante stage opened; the mafia concentrates on the
    /// lowest-id one still alive.
    fn ballot(&mut self, view: &View<'_>, _rng: &mut GameRng) -> Vec<(PlayerId, usize)> {
        let Some(agenda) = self.agenda.as_mut() else {
            return Vec::new();
        };
        agenda.update(view);
        if agenda.vigilante_sender().is_none() {
            return Vec::new();
        }
        let targets = self.ballot_targets.get_or_insert_with(|| {
            view.message_counts
                .iter()
                .enumerate()
                .filter(|(_, c)| c.received > 0)
                .map(|(i, _)| PlayerId(i))
                .collect()
        });
        while self.ballot_cursor < targets.len() && !view.alive.contains(targets[self.ballot_cursor]) {
            self.ballot_cursor += 1;
        }
        let Some(&target) = targets.get(self.ballot_cursor) else {
            return Vec::new();
        };
        let weight = if self.bloc {
            view.mafia_roster()
                .map_or(0, |r| r.iter().filter(|p| view.alive.contains(**p)).count())
        } else {
            1
        };
        vec![(target, weight)]
    }

    fn vote(&mut self, view: &View<'_>, day: &DayContext<'_>, _rng: &mut GameRng) -> BlocVote {
        BlocVote::Unanimous(honest_vote(self.agenda.as_mut(), view, day))
    }

    fn night_target(&mut self, view: &View<'_>, rng: &mut GameRng) -> Option<PlayerId> {
        mafia_uniform_night(view, rng).ok()
    }
}
