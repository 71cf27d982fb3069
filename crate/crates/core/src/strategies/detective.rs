use num_integer::Roots;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::Serialize;

use crate::engine::{
    Agent, BlocVote, DayContext, Declaration, EngineError, Faction, GameRng, Outgoing, Payload, PlayerId, PublicEvent,
    View,
};

use super::agenda::PublicAgenda;
use super::citizen::honest_vote;
use super::random_sum::citizen_random_sum;

/// Honest day behaviour every detective shares with the ordinary citizens.
struct DayHabits {
    agenda: PublicAgenda,
    announces: bool,
}

impl DayHabits {
    fn announce(&self, view: &View<'_>, rng: &mut GameRng) -> Option<u64> {
        self.announces.then(|| citizen_random_sum(view, rng))
    }

    fn vote(&mut self, view: &View<'_>, day: &DayContext<'_>) -> BlocVote {
        BlocVote::Unanimous(honest_vote(Some(&mut self.agenda), view, day))
    }
}

/// `⌈√η · R0⌉` with `η = M0/R0`, i.e. `⌈√(M0·R0)⌉`, computed exactly.
pub fn stage1_len(residents: usize, mafia: usize) -> usize {
    let n = residents * mafia;
    let root = n.sqrt();
    if root * root == n {
        root
    } else {
        root + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Collect,
    Transition,
    Vigilante,
    Forfeited,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StagedDetectiveState {
    pub stage: Stage,
    pub stage1_len: usize,
    pub query_list: Vec<PlayerId>,
    pub vigilantes: Vec<PlayerId>,
    pub leader_rank: usize,
}

impl StagedDetectiveState {
    /// Precommits `stage1_len` distinct ids other than `me`, in random order.
    pub fn precommit(me: PlayerId, residents: usize, mafia: usize, rng: &mut GameRng) -> Self {
        let stage1_len = stage1_len(residents, mafia);
        let others = residents.saturating_sub(1);
        let mut query_list: Vec<PlayerId> = index::sample(rng, others, stage1_len.min(others))
            .into_iter()
            .map(|i| PlayerId(if i >= me.index() { i + 1 } else { i }))
            .collect();
        query_list.shuffle(rng);
        Self {
            stage: Stage::Collect,
            stage1_len,
            query_list,
            vigilantes: Vec::new(),
            leader_rank: 0,
        }
    }

    /// Living residents the detective has confirmed as citizens, by id.
    pub fn compile_roster(&mut self, view: &View<'_>) {
        let known = view.detective_knowledge().expect("detective view");
        self.vigilantes = known
            .iter()
            .filter(|(p, f)| **f == Faction::Citizen && view.alive.contains(**p) && **p != view.self_id)
            .map(|(p, _)| *p)
            .collect();
    }
}

/// The single detective of the staged strategy: collect, hand the roster to
/// the confirmed citizens, then ask to be eliminated.
pub struct StagedDetective {
    habits: DayHabits,
    state: StagedDetectiveState,
    roster_sent: bool,
}

impl StagedDetective {
    pub fn new(view: &View<'_>, announces: bool, rng: &mut GameRng) -> Self {
        Self {
            habits: DayHabits {
                agenda: PublicAgenda::new(),
                announces,
            },
            state: StagedDetectiveState::precommit(view.self_id, view.common.residents, view.common.mafia, rng),
            roster_sent: false,
        }
    }

    pub fn state(&self) -> &StagedDetectiveState {
        &self.state
    }
}

impl Agent for StagedDetective {
    fn declare(&mut self, view: &View<'_>, _rng: &mut GameRng) -> Option<Declaration> {
        if self.state.stage != Stage::Collect || view.round < self.state.stage1_len {
            return None;
        }
        self.state.compile_roster(view);
        self.state.stage = Stage::Transition;
        Some(Declaration::RequestElimination)
    }

    fn private_sends(&mut self, view: &View<'_>, _rng: &mut GameRng) -> Vec<Outgoing> {
        if self.state.stage != Stage::Transition || self.roster_sent {
            return Vec::new();
        }
        self.roster_sent = true;
        let payload = Payload::Roster {
            members: self.state.vigilantes.clone(),
        };
        self.state
            .vigilantes
            .iter()
            .map(|&to| Outgoing {
                from: view.self_id,
                to,
                payload: payload.clone(),
            })
            .collect()
    }

    fn announce(&mut self, view: &View<'_>, rng: &mut GameRng) -> Option<u64> {
        self.habits.announce(view, rng)
    }

    fn vote(&mut self, view: &View<'_>, day: &DayContext<'_>, _rng: &mut GameRng) -> BlocVote {
        self.habits.vote(view, day)
    }

    /// Rounds whose precommitted target is already dead are wasted.
    fn query(&mut self, view: &View<'_>, _rng: &mut GameRng) -> Option<PlayerId> {
        if view.round >= self.state.stage1_len {
            return None;
        }
        self.state
            .query_list
            .get(view.round)
            .copied()
            .filter(|p| view.alive.contains(*p))
    }
}

/// Parameters of the many-detective strategy: `d` contiguous blocks of ids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionScenarioParams {
    pub d: usize,
    pub delta: f64,
    pub block_size: usize,
    pub residents: usize,
    /// `(η / 4d) · R0`, kept for reference only.
    pub t0: f64,
}

impl PartitionScenarioParams {
    pub fn new(d: usize, delta: f64, residents: usize, mafia: usize) -> Result<Self, EngineError> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(EngineError::Config(format!("delta must lie in (0, 1/2), got {delta}")));
        }
        if d == 0 || (d as f64) <= 4.0 / delta + 1.0 {
            return Err(EngineError::Config(format!(
                "d must exceed 4/delta + 1 = {}, got {d}",
                4.0 / delta + 1.0
            )));
        }
        let block_size = residents.div_ceil(d);
        let cap = (delta * residents as f64 / 4.0).floor() as usize;
        if block_size > cap {
            return Err(EngineError::Config(format!(
                "blocks of {block_size} exceed floor(delta/4 * R0) = {cap}"
            )));
        }
        let eta = mafia as f64 / residents as f64;
        Ok(Self {
            d,
            delta,
            block_size,
            residents,
            t0: eta / (4.0 * d as f64) * residents as f64,
        })
    }

    pub fn block(&self, index: usize) -> std::ops::Range<usize> {
        let start = (index * self.block_size).min(self.residents);
        start..((index + 1) * self.block_size).min(self.residents)
    }
}

/// One of the `d²` detectives: queries a random block, then publishes the
/// block's living mafia and asks to be eliminated.
pub struct PartitionDetective {
    habits: DayHabits,
    block: usize,
    queue: Vec<PlayerId>,
    next: usize,
    declared: bool,
}

impl PartitionDetective {
    pub fn new(view: &View<'_>, params: &PartitionScenarioParams, announces: bool, rng: &mut GameRng) -> Self {
        let block = rng.random_range(0..params.d);
        let queue = params
            .block(block)
            .map(PlayerId)
            .filter(|p| *p != view.self_id)
            .collect();
        Self {
            habits: DayHabits {
                agenda: PublicAgenda::new(),
                announces,
            },
            block,
            queue,
            next: 0,
            declared: false,
        }
    }

    fn skip_dead(&mut self, view: &View<'_>) {
        while self.next < self.queue.len() && !view.alive.contains(self.queue[self.next]) {
            self.next += 1;
        }
    }
}

impl Agent for PartitionDetective {
    fn declare(&mut self, view: &View<'_>, _rng: &mut GameRng) -> Option<Declaration> {
        self.skip_dead(view);
        if self.declared || self.next < self.queue.len() {
            return None;
        }
        self.declared = true;
        let known = view.detective_knowledge().expect("detective view");
        let mafia = known
            .iter()
            .filter(|(p, f)| **f == Faction::Mafia && view.alive.contains(**p))
            .map(|(p, _)| *p)
            .collect();
        Some(Declaration::RevealMafia {
            block: self.block,
            mafia,
        })
    }

    fn announce(&mut self, view: &View<'_>, rng: &mut GameRng) -> Option<u64> {
        self.habits.announce(view, rng)
    }

    fn vote(&mut self, view: &View<'_>, day: &DayContext<'_>, _rng: &mut GameRng) -> BlocVote {
        self.habits.vote(view, day)
    }

    fn query(&mut self, view: &View<'_>, _rng: &mut GameRng) -> Option<PlayerId> {
        self.skip_dead(view);
        let target = self.queue.get(self.next).copied()?;
        self.next += 1;
        Some(target)
    }
}

/// Detective of the strategy without private channels: random queries until
/// the known living citizens (itself included) are a strict majority, then
/// publish them.
pub struct NoCryptoDetective {
    habits: DayHabits,
    confirmed: Vec<bool>,
    confirmed_alive: usize,
    last_query: Option<PlayerId>,
    log_cursor: usize,
    declared: bool,
}

impl NoCryptoDetective {
    pub fn new(view: &View<'_>, announces: bool) -> Self {
        let mut confirmed = vec![false; view.common.residents];
        confirmed[view.self_id.index()] = true;
        Self {
            habits: DayHabits {
                agenda: PublicAgenda::new(),
                announces,
            },
            confirmed,
            confirmed_alive: 1,
            last_query: None,
            log_cursor: 0,
            declared: false,
        }
    }

    fn refresh(&mut self, view: &View<'_>) {
        if let Some(target) = self.last_query.take() {
            let known = view.detective_knowledge().expect("detective view");
            if known.get(&target) == Some(&Faction::Citizen)
                && view.alive.contains(target)
                && !self.confirmed[target.index()]
            {
                self.confirmed[target.index()] = true;
                self.confirmed_alive += 1;
            }
        }
        let log = view.public_log;
        while self.log_cursor < log.len() {
            if let PublicEvent::DayElimination { player, .. } | PublicEvent::NightElimination { player, .. } =
                &log[self.log_cursor]
            {
                if self.confirmed[player.index()] {
                    self.confirmed[player.index()] = false;
                    self.confirmed_alive -= 1;
                }
            }
            self.log_cursor += 1;
        }
    }
}

impl Agent for NoCryptoDetective {
    fn declare(&mut self, view: &View<'_>, _rng: &mut GameRng) -> Option<Declaration> {
        self.refresh(view);
        if self.declared || 2 * self.confirmed_alive <= view.residents_alive() {
            return None;
        }
        self.declared = true;
        let roster = self
            .confirmed
            .iter()
            .enumerate()
            .filter(|(_, c)| **c)
            .map(|(i, _)| PlayerId(i))
            .collect();
        Some(Declaration::PublishCitizens { roster })
    }

    fn announce(&mut self, view: &View<'_>, rng: &mut GameRng) -> Option<u64> {
        self.habits.announce(view, rng)
    }

    fn vote(&mut self, view: &View<'_>, day: &DayContext<'_>, _rng: &mut GameRng) -> BlocVote {
        self.habits.vote(view, day)
    }

    fn query(&mut self, view: &View<'_>, rng: &mut GameRng) -> Option<PlayerId> {
        self.refresh(view);
        let n = view.residents_alive();
        if n < 2 {
            return None;
        }
        loop {
            let candidate = view.alive.nth(rng.random_range(0..n)).expect("rank in range");
            if candidate != view.self_id {
                self.last_query = Some(candidate);
                return Some(candidate);
            }
        }
    }
}
