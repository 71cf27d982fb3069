use std::collections::BTreeMap;

use mafia_core::engine::*;
use mafia_core::strategies::{citizen_random_sum, random_sum_target, ProfileKind, StrategyProfile};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Rejects uniformity at the 0.01 level.
fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((counts.len() - 1) as f64).unwrap().inverse_cdf(0.99);
    (stat, critical)
}

#[test]
fn plurality_picks_from_the_argmax_uniformly() {
    let mut rng = GameRng::seed_from_u64(11);
    let alive = AliveSet::full(12);
    let mut tie_counts = [0u64; 4];
    for trial in 0..100_000 {
        let mut ballots = BTreeMap::new();
        for voter in 0..12 {
            ballots.insert(PlayerId(voter), PlayerId(rng.random_range(0..12)));
        }
        let mut per_target = [0usize; 12];
        for t in ballots.values() {
            per_target[t.index()] += 1;
        }
        let best = *per_target.iter().max().unwrap();
        let winner = tally_plurality(&ballots, &alive, &mut rng).unwrap();
        assert_eq!(per_target[winner.index()], best, "trial {trial}");
    }
    // A forced four-way tie.
    let ballots: BTreeMap<PlayerId, PlayerId> = (0..8).map(|v| (PlayerId(v), PlayerId(v % 4))).collect();
    for _ in 0..40_000 {
        tie_counts[tally_plurality(&ballots, &alive, &mut rng).unwrap().index()] += 1;
    }
    let (stat, critical) = chi_square_uniform(&tie_counts);
    assert!(stat < critical, "chi-square {stat} >= {critical}: {tie_counts:?}");
}

#[test]
fn random_sum_target_is_uniform_despite_a_fixed_mafia_number() {
    let config = GameConfig::new(11, 2, 0).unwrap();
    let state = GameState::new(&config, 3).unwrap();
    let mut rng = GameRng::seed_from_u64(5);
    let mut counts = [0u64; 11];
    for _ in 0..100_000 {
        let mut numbers = BTreeMap::new();
        for p in state.alive().iter() {
            let view = state.view(p).unwrap();
            let n = if view.self_role.is_mafia() {
                7
            } else {
                citizen_random_sum(&view, &mut rng)
            };
            numbers.insert(p, n);
        }
        let transcript = ideal_simultaneous_broadcast(&numbers, state.alive()).unwrap();
        counts[random_sum_target(state.alive(), &transcript).index()] += 1;
    }
    let (stat, critical) = chi_square_uniform(&counts);
    assert!(stat < critical, "chi-square {stat} >= {critical}: {counts:?}");
}

#[test]
fn views_respect_the_information_firewall() {
    let config = GameConfig::new(9, 2, 1).unwrap();
    let mut state = GameState::new(&config, 17).unwrap();
    let roles = state.roles().to_vec();
    let detective = PlayerId(roles.iter().position(|r| r.is_detective).unwrap());
    let mafia: Vec<PlayerId> = (0..9).filter(|&i| roles[i].is_mafia()).map(PlayerId).collect();
    let citizen = PlayerId(
        (0..9)
            .find(|&i| !roles[i].is_mafia() && !roles[i].is_detective)
            .unwrap(),
    );

    let citizen_json = serde_json::to_value(state.view(citizen).unwrap()).unwrap();
    assert_eq!(citizen_json["private"]["kind"], "none");
    assert!(citizen_json["private"].get("entries").is_none());
    let mafia_view = state.view(mafia[0]).unwrap();
    assert_eq!(mafia_view.mafia_roster().unwrap(), &mafia[..]);

    // Advance to the detectives phase by voting out a citizen and killing another.
    let day_target = (0..9)
        .map(PlayerId)
        .find(|&p| p != detective && !roles[p.index()].is_mafia())
        .unwrap();
    let mut votes = Votes::new();
    votes.cast(day_target, 9);
    state.residents_round(&votes, &mut GameRng::seed_from_u64(0)).unwrap();
    let night_target = (0..9)
        .map(PlayerId)
        .find(|&p| p != detective && p != day_target && !roles[p.index()].is_mafia())
        .unwrap();
    state.mafia_round(night_target).unwrap();
    state
        .detectives_round(&BTreeMap::from([(detective, mafia[1])]))
        .unwrap();

    let known = state.view(detective).unwrap().detective_knowledge().unwrap().clone();
    assert_eq!(known.get(&mafia[1]), Some(&Faction::Mafia));
    assert_eq!(known.len(), 1, "exactly the queried entry");

    let log = serde_json::to_value(state.public_log()).unwrap();
    let day = log
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["kind"] == "day_elimination")
        .unwrap();
    assert_eq!(day["faction"], "citizen");
    let night = log
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["kind"] == "night_elimination")
        .unwrap();
    assert!(night.get("faction").is_none());
    assert_eq!(night["detective"], false);
}

#[test]
fn baseline_citizen_decisions_ignore_hidden_roles() {
    // Swapping two hidden roles the observer cannot see leaves its view, and
    // hence its decisions, unchanged.
    let config = GameConfig::new(8, 2, 0).unwrap().with_fidelity(Fidelity::Protocol);
    let mut roles = vec![Role::CITIZEN; 8];
    roles[3] = Role::MAFIA;
    roles[6] = Role::MAFIA;
    let a = GameState::with_roles(&config, roles.clone()).unwrap();
    roles.swap(3, 5);
    let b = GameState::with_roles(&config, roles).unwrap();
    let observer = PlayerId(0);
    let profile = StrategyProfile::new(ProfileKind::Baseline);
    for seed in 0..50 {
        let decide = |state: &GameState| {
            let view = state.view(observer).unwrap();
            let seat = Seat {
                kind: SeatKind::Citizens,
                fidelity: Fidelity::Protocol,
                view,
            };
            let mut rng = GameRng::seed_from_u64(seed);
            let mut agent = profile.spawn(&seat, &mut rng).unwrap();
            let number = agent.announce(&view, &mut rng).unwrap();
            let transcript =
                ideal_simultaneous_broadcast(&BTreeMap::from([(observer, number)]), state.alive()).unwrap();
            let vote = agent.vote(
                &view,
                &DayContext {
                    transcript: &transcript,
                    ballot_winner: None,
                },
                &mut rng,
            );
            (number, vote)
        };
        assert_eq!(decide(&a), decide(&b));
    }
}

#[test]
fn run_game_is_a_function_of_its_inputs() {
    for fidelity in [Fidelity::Protocol, Fidelity::Reduced] {
        let config = GameConfig::new(40, 4, 1).unwrap().with_fidelity(fidelity);
        for name in ["baseline-no-detective", "staged-detective", "nocrypto-detective"] {
            let profile = StrategyProfile::by_name(name, &Default::default()).unwrap();
            let a = run_game(&config, &profile, 99).unwrap();
            let b = run_game(&config, &profile, 99).unwrap();
            assert_eq!(a, b, "{name} {fidelity:?}");
        }
    }
}

#[test]
fn protocol_game_at_three_one_matches_two_thirds() {
    let config = GameConfig::new(3, 1, 0).unwrap().with_fidelity(Fidelity::Protocol);
    let profile = StrategyProfile::new(ProfileKind::Baseline);
    let n = 30_000;
    let wins = (0..n)
        .filter(|&s| run_game(&config, &profile, s).unwrap().winner == Faction::Mafia)
        .count() as f64;
    let p = wins / n as f64;
    let se = (2.0 / 9.0 / n as f64).sqrt();
    assert!((p - 2.0 / 3.0).abs() <= 4.0 * se, "{p}");
}

#[test]
fn trajectory_points_are_consistent() {
    let config = GameConfig::new(60, 5, 0).unwrap().with_fidelity(Fidelity::Protocol);
    let profile = StrategyProfile::new(ProfileKind::Baseline);
    let out = run_game(&config, &profile, 4).unwrap();
    assert_eq!(
        out.trajectory[0],
        TrajectoryPoint {
            t: 0,
            residents: 60,
            mafia: 5
        }
    );
    for w in out.trajectory.windows(2) {
        assert!(w[1].residents < w[0].residents);
        assert!(w[1].mafia <= w[0].mafia);
    }
    let last = out.trajectory.last().unwrap();
    assert_eq!(adjudicate_counts(last.residents, last.mafia, true), Some(out.winner));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eliminations_plus_alive_is_constant(r in 3usize..40, m_frac in 0.0f64..0.5, seed in any::<u64>()) {
        let m = ((r as f64 * m_frac) as usize).max(1);
        let config = GameConfig::new(r, m, 0).unwrap();
        let mut state = GameState::new(&config, seed).unwrap();
        let mut rng = GameRng::seed_from_u64(seed);
        while state.settle().is_none() {
            let alive = state.alive().to_vec();
            let mut votes = Votes::new();
            votes.cast(alive[rng.random_range(0..alive.len())], alive.len());
            state.residents_round(&votes, &mut rng).unwrap();
            prop_assert_eq!(state.eliminations() + state.residents_alive(), r);
            if state.phase() == Phase::Terminated {
                break;
            }
            let citizens: Vec<PlayerId> =
                state.alive().iter().filter(|p| !state.role(*p).unwrap().is_mafia()).collect();
            state.mafia_round(citizens[rng.random_range(0..citizens.len())]).unwrap();
            prop_assert_eq!(state.eliminations() + state.residents_alive(), r);
            if state.phase() == Phase::Terminated {
                break;
            }
            state.detectives_round(&BTreeMap::new()).unwrap();
        }
        let winner = state.winner().unwrap();
        prop_assert_eq!(Some(winner), adjudicate_counts(state.residents_alive(), state.mafia_alive(), true));
    }

    #[test]
    fn adjudication_matches_its_definition(r in 0usize..200, m in 0usize..200, majority in any::<bool>()) {
        prop_assume!(m <= r);
        let expected = if m == 0 && r > 0 {
            Some(Faction::Citizen)
        } else if r > 0 && (m == r || (majority && 2 * m >= r)) {
            Some(Faction::Mafia)
        } else {
            None
        };
        prop_assert_eq!(adjudicate_counts(r, m, majority), expected);
    }
}
