use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::ideal::DeliveryReceipt;
use super::tally::{tally_weighted, Votes};
use super::{
    adjudicate_counts, AliveSet, CommonKnowledge, Declaration, EngineError, Faction, GameConfig, GameRng,
    MessageCounts, Payload, Phase, PlayerId, PrivateKnowledge, PrivateMessage, PublicEvent, Role, View,
};

/// Full hidden-information position of one game.
#[derive(Debug, Clone)]
pub struct GameState {
    config: GameConfig,
    round: usize,
    phase: Phase,
    alive: AliveSet,
    roles: Vec<Role>,
    mafia_roster: Vec<PlayerId>,
    mafia_alive: usize,
    eliminations: usize,
    public_log: Vec<PublicEvent>,
    detective_knowledge: BTreeMap<PlayerId, BTreeMap<PlayerId, Faction>>,
    inboxes: Vec<Vec<PrivateMessage>>,
    message_counts: Vec<MessageCounts>,
    winner: Option<Faction>,
    forfeited: bool,
}

impl GameState {
    /// Deals roles uniformly at random from `seed`.
    pub fn new(config: &GameConfig, seed: u64) -> Result<Self, EngineError> {
        let mut rng = GameRng::seed_from_u64(seed);
        Self::deal(config, &mut rng)
    }

    /// Deals roles with an externally owned generator, which the caller
    /// keeps using for the rest of the game.
    pub fn deal(config: &GameConfig, rng: &mut GameRng) -> Result<Self, EngineError> {
        config.validate()?;
        let n = config.residents;
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(rng);
        let mut roles = vec![Role::CITIZEN; n];
        for &id in &ids[..config.mafia] {
            roles[id] = Role::MAFIA;
        }
        for &id in &ids[config.mafia..config.mafia + config.detectives] {
            roles[id] = Role::DETECTIVE;
        }
        Self::with_roles(config, roles)
    }

    /// Starts a game from an explicit role assignment, which must match the
    /// configured counts.
    pub fn with_roles(config: &GameConfig, roles: Vec<Role>) -> Result<Self, EngineError> {
        config.validate()?;
        let n = config.residents;
        if roles.len() != n {
            return Err(EngineError::Config(format!(
                "{} roles dealt for {n} players",
                roles.len()
            )));
        }
        let mafia_roster: Vec<PlayerId> = (0..n).filter(|&i| roles[i].is_mafia()).map(PlayerId).collect();
        let detectives = roles.iter().filter(|r| r.is_detective).count();
        if mafia_roster.len() != config.mafia
            || detectives != config.detectives
            || roles.iter().any(|r| r.is_detective && r.is_mafia())
        {
            return Err(EngineError::Config(
                "role assignment does not match the configured counts".into(),
            ));
        }
        let detective_knowledge = roles
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_detective)
            .map(|(i, _)| (PlayerId(i), BTreeMap::new()))
            .collect();

        Ok(Self {
            config: config.clone(),
            round: 0,
            phase: Phase::Residents,
            alive: AliveSet::full(n),
            roles,
            mafia_roster,
            mafia_alive: config.mafia,
            eliminations: 0,
            public_log: Vec::new(),
            detective_knowledge,
            inboxes: vec![Vec::new(); n],
            message_counts: vec![MessageCounts::default(); n],
            winner: None,
            forfeited: false,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    /// Completed residents/mafia/detectives cycles.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn alive(&self) -> &AliveSet {
        &self.alive
    }

    pub fn residents_alive(&self) -> usize {
        self.alive.len()
    }

    pub fn mafia_alive(&self) -> usize {
        self.mafia_alive
    }

    pub fn detectives_alive(&self) -> usize {
        self.detective_knowledge
            .keys()
            .filter(|d| self.alive.contains(**d))
            .count()
    }

    pub fn eliminations(&self) -> usize {
        self.eliminations
    }

    pub fn role(&self, player: PlayerId) -> Option<Role> {
        self.roles.get(player.index()).copied()
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn public_log(&self) -> &[PublicEvent] {
        &self.public_log
    }

    pub fn detective_knowledge(&self) -> &BTreeMap<PlayerId, BTreeMap<PlayerId, Faction>> {
        &self.detective_knowledge
    }

    pub fn message_counts(&self) -> &[MessageCounts] {
        &self.message_counts
    }

    pub fn winner(&self) -> Option<Faction> {
        self.winner
    }

    pub fn forfeited(&self) -> bool {
        self.forfeited
    }

    /// Winner under the termination rules, if any: citizens once the mafia
    /// is gone, the mafia once the citizens are gone or, with majority
    /// adjudication, once `2·M_t ≥ R_t`.
    pub fn adjudicate(&self) -> Option<Faction> {
        adjudicate_counts(self.alive.len(), self.mafia_alive, self.config.adjudicate_majority)
    }

    /// What `player` is allowed to know.
    pub fn view(&self, player: PlayerId) -> Result<View<'_>, EngineError> {
        let role = self
            .role(player)
            .ok_or_else(|| EngineError::Protocol(format!("unknown player {player}")))?;
        let private = if role.is_mafia() {
            PrivateKnowledge::MafiaRoster(&self.mafia_roster)
        } else if let Some(known) = self.detective_knowledge.get(&player) {
            PrivateKnowledge::Detective(known)
        } else {
            PrivateKnowledge::None
        };
        Ok(View {
            self_id: player,
            self_role: role,
            round: self.round,
            phase: self.phase,
            common: CommonKnowledge {
                residents: self.config.residents,
                mafia: self.config.mafia,
                detectives: self.config.detectives,
                adjudicate_majority: self.config.adjudicate_majority,
            },
            alive: &self.alive,
            public_log: &self.public_log,
            private,
            inbox: &self.inboxes[player.index()],
            message_counts: &self.message_counts,
        })
    }

    fn expect_phase(&self, phase: Phase) -> Result<(), EngineError> {
        if self.phase != phase {
            return Err(EngineError::Protocol(format!(
                "expected the {phase:?} phase, game is in {:?}",
                self.phase
            )));
        }
        Ok(())
    }

    fn expect_alive(&self, player: PlayerId) -> Result<(), EngineError> {
        if !self.alive.contains(player) {
            return Err(EngineError::Protocol(format!("{player} is not alive")));
        }
        Ok(())
    }

    fn eliminate(&mut self, player: PlayerId) {
        self.alive.remove(player);
        self.eliminations += 1;
        if self.roles[player.index()].is_mafia() {
            self.mafia_alive -= 1;
        }
    }

    /// Moves to `next` unless the position is decided.
    fn advance(&mut self, next: Phase) {
        if let Some(winner) = self.adjudicate() {
            self.winner = Some(winner);
            self.phase = Phase::Terminated;
        } else {
            self.phase = next;
        }
    }

    /// Ends the game in the mafia's favour after a citizen-side concession.
    pub fn forfeit(&mut self) {
        self.winner = Some(Faction::Mafia);
        self.forfeited = true;
        self.phase = Phase::Terminated;
    }

    /// Adjudicates before any round is played (e.g. a game dealt without mafia).
    pub fn settle(&mut self) -> Option<Faction> {
        if self.phase != Phase::Terminated {
            if let Some(winner) = self.adjudicate() {
                self.winner = Some(winner);
                self.phase = Phase::Terminated;
            }
        }
        self.winner
    }

    /// Open plurality vote; the loser is eliminated and fully revealed.
    /// Every living resident must be represented in `votes`.
    pub fn residents_round(&mut self, votes: &Votes, rng: &mut GameRng) -> Result<PlayerId, EngineError> {
        self.expect_phase(Phase::Residents)?;
        let cast = votes.total();
        if cast != self.alive.len() {
            return Err(EngineError::Protocol(format!(
                "{cast} votes cast but {} residents must vote",
                self.alive.len()
            )));
        }
        let target = tally_weighted(votes.entries(), &self.alive, rng)?;
        let role = self.roles[target.index()];
        self.eliminate(target);
        self.public_log.push(PublicEvent::DayElimination {
            player: target,
            faction: role.faction,
            detective: role.is_detective,
        });
        self.advance(Phase::Mafia);
        Ok(target)
    }

    /// The mafia removes a citizen; only the detective flag is made public.
    pub fn mafia_round(&mut self, target: PlayerId) -> Result<(), EngineError> {
        self.expect_phase(Phase::Mafia)?;
        self.expect_alive(target)?;
        let role = self.roles[target.index()];
        if role.is_mafia() {
            return Err(EngineError::Protocol(format!(
                "the mafia cannot eliminate its own member {target}"
            )));
        }
        self.eliminate(target);
        self.public_log.push(PublicEvent::NightElimination {
            player: target,
            detective: role.is_detective,
        });
        self.advance(Phase::Detectives);
        Ok(())
    }

    /// Each living detective learns the true faction of its target.
    pub fn detectives_round(&mut self, queries: &BTreeMap<PlayerId, PlayerId>) -> Result<(), EngineError> {
        self.expect_phase(Phase::Detectives)?;
        for (&detective, &target) in queries {
            if !self.roles.get(detective.index()).is_some_and(|r| r.is_detective) {
                return Err(EngineError::Protocol(format!("{detective} is not a detective")));
            }
            self.expect_alive(detective)?;
            self.expect_alive(target)?;
        }
        for (&detective, &target) in queries {
            let faction = self.roles[target.index()].faction;
            self.detective_knowledge
                .get_mut(&detective)
                .expect("detective ids are seeded at deal time")
                .insert(target, faction);
        }
        self.round += 1;
        self.phase = Phase::Residents;
        Ok(())
    }

    /// Publishes a claim made during the residents round.
    pub fn declare(&mut self, player: PlayerId, payload: Declaration) -> Result<(), EngineError> {
        self.expect_phase(Phase::Residents)?;
        self.expect_alive(player)?;
        self.public_log.push(PublicEvent::Declaration { player, payload });
        Ok(())
    }

    /// Publishes the numbers of a simultaneous broadcast.
    pub fn record_announcements(&mut self, transcript: &super::Transcript) {
        self.public_log.extend(
            transcript
                .entries()
                .iter()
                .map(|&(player, number)| PublicEvent::Announcement { player, number }),
        );
    }

    pub fn record_ballot_result(&mut self, target: PlayerId) {
        self.public_log.push(PublicEvent::BallotResult { target });
    }

    /// Moderator-carried private message. Only the per-player send/receive
    /// counts become public.
    pub fn ideal_private_send(
        &mut self,
        from: PlayerId,
        to: PlayerId,
        payload: Payload,
    ) -> Result<DeliveryReceipt, EngineError> {
        self.expect_alive(from)?;
        if !self.alive.contains(to) {
            return Err(EngineError::Undeliverable(to));
        }
        self.message_counts[from.index()].sent += 1;
        self.message_counts[to.index()].received += 1;
        self.inboxes[to.index()].push(PrivateMessage {
            from,
            round: self.round,
            payload,
        });
        Ok(DeliveryReceipt {
            from,
            to,
            round: self.round,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(r: usize, m: usize, d: usize, seed: u64) -> GameState {
        GameState::new(&GameConfig::new(r, m, d).unwrap(), seed).unwrap()
    }

    fn first_with(state: &GameState, pred: impl Fn(Role) -> bool) -> PlayerId {
        state.alive().iter().find(|p| pred(state.role(*p).unwrap())).unwrap()
    }

    fn unanimous(state: &GameState, target: PlayerId) -> Votes {
        let mut votes = Votes::new();
        votes.cast(target, state.residents_alive());
        votes
    }

    #[test]
    fn deal_counts_and_determinism() {
        let a = state(10, 3, 1, 42);
        assert_eq!(a.roles().iter().filter(|r| r.is_mafia()).count(), 3);
        assert_eq!(a.roles().iter().filter(|r| r.is_detective).count(), 1);
        assert!(a.roles().iter().all(|r| !(r.is_detective && r.is_mafia())));
        let b = state(10, 3, 1, 42);
        assert_eq!(a.roles(), b.roles());
        assert_eq!(a.phase(), Phase::Residents);
        assert_eq!(a.round(), 0);
        assert!(a.public_log().is_empty());
    }

    #[test]
    fn no_mafia_is_already_a_citizen_win() {
        let s = state(5, 0, 0, 1);
        assert_eq!(s.adjudicate(), Some(Faction::Citizen));
    }

    #[test]
    fn day_elimination_reveals_full_role() {
        let mut s = state(10, 3, 1, 7);
        let mut rng = GameRng::seed_from_u64(0);
        let mafia = first_with(&s, |r| r.is_mafia());
        let votes = unanimous(&s, mafia);
        s.residents_round(&votes, &mut rng).unwrap();
        assert_eq!(s.residents_alive(), 9);
        assert_eq!(
            s.public_log().last(),
            Some(&PublicEvent::DayElimination {
                player: mafia,
                faction: Faction::Mafia,
                detective: false
            })
        );
        assert_eq!(s.phase(), Phase::Mafia);
    }

    #[test]
    fn eliminating_the_last_mafia_ends_the_game() {
        let mut s = state(6, 1, 0, 3);
        let mut rng = GameRng::seed_from_u64(0);
        let mafia = first_with(&s, |r| r.is_mafia());
        s.residents_round(&unanimous(&s, mafia), &mut rng).unwrap();
        assert_eq!(s.winner(), Some(Faction::Citizen));
        assert_eq!(s.phase(), Phase::Terminated);
    }

    #[test]
    fn citizen_loss_into_majority_hands_the_mafia_the_game() {
        // 5 residents, 2 mafia: after one citizen is voted out M = R - 2 = 2 of 4
        let mut s = state(5, 2, 0, 11);
        let mut rng = GameRng::seed_from_u64(0);
        let citizen = first_with(&s, |r| !r.is_mafia());
        s.residents_round(&unanimous(&s, citizen), &mut rng).unwrap();
        assert_eq!(s.winner(), Some(Faction::Mafia));

        let mut s = state(3, 1, 0, 11);
        let citizen = first_with(&s, |r| !r.is_mafia());
        s.residents_round(&unanimous(&s, citizen), &mut rng).unwrap();
        assert_eq!(s.winner(), Some(Faction::Mafia));
    }

    #[test]
    fn partial_vote_is_rejected() {
        let mut s = state(5, 1, 0, 2);
        let mut rng = GameRng::seed_from_u64(0);
        let mut votes = Votes::new();
        votes.cast(PlayerId(0), 3);
        assert!(matches!(
            s.residents_round(&votes, &mut rng),
            Err(EngineError::Protocol(_))
        ));
    }

    #[test]
    fn night_reveals_only_the_detective_flag() {
        let mut s = state(10, 2, 1, 5);
        let mut rng = GameRng::seed_from_u64(0);
        let citizen = first_with(&s, |r| !r.is_mafia() && !r.is_detective);
        s.residents_round(&unanimous(&s, citizen), &mut rng).unwrap();
        let detective = first_with(&s, |r| r.is_detective);
        s.mafia_round(detective).unwrap();
        let last = s.public_log().last().unwrap();
        assert_eq!(
            *last,
            PublicEvent::NightElimination {
                player: detective,
                detective: true
            }
        );
        let json = serde_json::to_string(last).unwrap();
        assert!(!json.contains("faction"), "{json}");
        assert_eq!(s.phase(), Phase::Detectives);
    }

    #[test]
    fn mafia_cannot_target_its_own_or_the_dead() {
        let mut s = state(10, 2, 0, 5);
        let mut rng = GameRng::seed_from_u64(0);
        let citizen = first_with(&s, |r| !r.is_mafia());
        s.residents_round(&unanimous(&s, citizen), &mut rng).unwrap();
        let mafia = first_with(&s, |r| r.is_mafia());
        assert!(s.mafia_round(mafia).is_err());
        assert!(s.mafia_round(citizen).is_err());
    }

    #[test]
    fn detective_queries_are_private_and_truthful() {
        let mut s = state(10, 3, 1, 9);
        let mut rng = GameRng::seed_from_u64(0);
        let detective = first_with(&s, |r| r.is_detective);
        let mafia = first_with(&s, |r| r.is_mafia());
        let citizen = s
            .alive()
            .iter()
            .find(|p| *p != detective && !s.role(*p).unwrap().is_mafia())
            .unwrap();
        let other = s
            .alive()
            .iter()
            .find(|p| *p != detective && *p != citizen && !s.role(*p).unwrap().is_mafia())
            .unwrap();
        s.residents_round(&unanimous(&s, citizen), &mut rng).unwrap();
        s.mafia_round(other).unwrap();
        let log_len = s.public_log().len();

        let not_detective = BTreeMap::from([(mafia, detective)]);
        assert!(s.detectives_round(&not_detective).is_err());

        s.detectives_round(&BTreeMap::from([(detective, mafia)])).unwrap();
        assert_eq!(s.public_log().len(), log_len);
        assert_eq!(s.detective_knowledge()[&detective][&mafia], Faction::Mafia);
        assert_eq!(s.round(), 1);
        assert_eq!(s.phase(), Phase::Residents);
    }

    #[test]
    fn empty_query_round_only_advances_time() {
        let mut s = state(10, 1, 0, 9);
        let mut rng = GameRng::seed_from_u64(0);
        let citizen = first_with(&s, |r| !r.is_mafia());
        s.residents_round(&unanimous(&s, citizen), &mut rng).unwrap();
        let other = first_with(&s, |r| !r.is_mafia());
        s.mafia_round(other).unwrap();
        let before = s.clone();
        s.detectives_round(&BTreeMap::new()).unwrap();
        assert_eq!(s.round(), before.round() + 1);
        assert_eq!(s.public_log(), before.public_log());
        assert_eq!(s.alive(), before.alive());
    }

    #[test]
    fn private_send_leaves_only_counts_in_public() {
        let mut s = state(6, 1, 1, 4);
        let detective = first_with(&s, |r| r.is_detective);
        let roster: Vec<PlayerId> = s
            .alive()
            .iter()
            .filter(|p| *p != detective && !s.role(*p).unwrap().is_mafia())
            .collect();
        for &member in &roster {
            s.ideal_private_send(
                detective,
                member,
                Payload::Roster {
                    members: roster.clone(),
                },
            )
            .unwrap();
        }
        for &member in &roster {
            let view = s.view(member).unwrap();
            assert_eq!(view.inbox.len(), 1);
            assert_eq!(view.message_counts[member.index()].received, 1);
        }
        assert_eq!(s.message_counts()[detective.index()].sent, roster.len());
        assert!(s.public_log().is_empty());
    }

    #[test]
    fn sending_to_the_dead_is_undeliverable() {
        let mut s = state(6, 1, 0, 4);
        let mut rng = GameRng::seed_from_u64(0);
        let victim = first_with(&s, |r| !r.is_mafia());
        s.residents_round(&unanimous(&s, victim), &mut rng).unwrap();
        let sender = first_with(&s, |r| !r.is_mafia());
        assert_eq!(
            s.ideal_private_send(sender, victim, Payload::Target { player: sender }),
            Err(EngineError::Undeliverable(victim))
        );
    }
}
