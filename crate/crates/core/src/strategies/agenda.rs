use crate::engine::{Declaration, Faction, PlayerId, PublicEvent, View};

/// What the public record says the residents should do next, maintained
/// incrementally from the public log.
///
/// A declaration is a detective claim plus a request to be eliminated. It is
/// acted on only once the claimant's elimination reveals a detective; a
/// claim exposed as false is dropped.
#[derive(Debug, Clone, Default)]
pub struct PublicAgenda {
    cursor: usize,
    pending: Vec<(PlayerId, Declaration)>,
    kill_list: Vec<PlayerId>,
    kill_cursor: usize,
    roster: Option<Vec<PlayerId>>,
    outside_cursor: usize,
    vigilante_sender: Option<PlayerId>,
    vigilante_round: Option<usize>,
    mafia_eliminated: usize,
    undeclared_detective_died: bool,
    verified: usize,
}

impl PublicAgenda {
    pub fn new() -> Self {
        Self::default()
    }

    /// Consumes the public events not seen yet.
    pub fn update(&mut self, view: &View<'_>) {
        let log = view.public_log;
        while self.cursor < log.len() {
            let event = &log[self.cursor];
            self.cursor += 1;
            match event {
                PublicEvent::Declaration { player, payload } => self.pending.push((*player, payload.clone())),
                PublicEvent::DayElimination {
                    player,
                    faction,
                    detective,
                } => {
                    if *faction == Faction::Mafia {
                        self.mafia_eliminated += 1;
                    }
                    self.settle_claim(*player, *detective, view.round);
                }
                PublicEvent::NightElimination { player, detective } => {
                    self.settle_claim(*player, *detective, view.round)
                }
                PublicEvent::Announcement { .. } | PublicEvent::BallotResult { .. } => {}
            }
        }
    }

    fn settle_claim(&mut self, player: PlayerId, detective: bool, round: usize) {
        let Some(index) = self.pending.iter().position(|(p, _)| *p == player) else {
            if detective {
                self.undeclared_detective_died = true;
            }
            return;
        };
        let (_, claim) = self.pending.remove(index);
        if !detective {
            return;
        }
        self.verified += 1;
        match claim {
            Declaration::RequestElimination => {
                if self.vigilante_sender.is_none() {
                    self.vigilante_sender = Some(player);
                    self.vigilante_round = Some(round);
                }
            }
            Declaration::RevealMafia { mafia, .. } => self.kill_list.extend(mafia),
            Declaration::PublishCitizens { mut roster } => {
                if self.roster.is_none() {
                    roster.sort_unstable();
                    self.roster = Some(roster);
                }
            }
        }
    }

    /// The open-vote target dictated by public information, in priority
    /// order: pending claimants in declaration order, verified revealed
    /// mafia, then residents outside a verified citizen roster by increasing
    /// id. `None` leaves the choice to the ballot or the random sum.
    pub fn directed_target(&mut self, view: &View<'_>) -> Option<PlayerId> {
        if let Some((player, _)) = self.pending.iter().find(|(p, _)| view.alive.contains(*p)) {
            return Some(*player);
        }
        while self.kill_cursor < self.kill_list.len() {
            let candidate = self.kill_list[self.kill_cursor];
            if view.alive.contains(candidate) {
                return Some(candidate);
            }
            self.kill_cursor += 1;
        }
        if let Some(roster) = &self.roster {
            let n = view.alive.capacity();
            while self.outside_cursor < n {
                let candidate = PlayerId(self.outside_cursor);
                if view.alive.contains(candidate) && roster.binary_search(&candidate).is_err() {
                    return Some(candidate);
                }
                self.outside_cursor += 1;
            }
        }
        None
    }

    /// Mafia members still alive by the public count `M0 − (day-revealed mafia)`.
    /// Exact because night victims are always citizens.
    pub fn mafia_alive(&self, view: &View<'_>) -> usize {
        view.common.mafia.saturating_sub(self.mafia_eliminated)
    }

    /// Sender of the first verified request for elimination, i.e. the
    /// detective whose private roster is now known to be genuine.
    pub fn vigilante_sender(&self) -> Option<PlayerId> {
        self.vigilante_sender
    }

    pub fn vigilante_round(&self) -> Option<usize> {
        self.vigilante_round
    }

    pub fn undeclared_detective_died(&self) -> bool {
        self.undeclared_detective_died
    }

    pub fn pending_claims(&self) -> &[(PlayerId, Declaration)] {
        &self.pending
    }

    pub fn kill_list(&self) -> &[PlayerId] {
        &self.kill_list
    }

    pub fn roster(&self) -> Option<&[PlayerId]> {
        self.roster.as_deref()
    }

    pub fn verified_claims(&self) -> usize {
        self.verified
    }
}
