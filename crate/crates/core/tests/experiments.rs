use mafia_core::engine::{Fidelity, GameConfig, GameRng};
use mafia_core::experiments::*;
use mafia_core::strategies::ProfileParams;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

/// Independent oracle: float recursion over the reduced chain with majority
/// adjudication, memoised on `(R, M, night)`.
fn oracle_win(r: usize, m: usize) -> f64 {
    fn go(r: usize, m: usize, night: bool, memo: &mut std::collections::HashMap<(usize, usize, bool), f64>) -> f64 {
        if m == 0 {
            return 0.0;
        }
        if 2 * m >= r {
            return 1.0;
        }
        if let Some(&v) = memo.get(&(r, m, night)) {
            return v;
        }
        let v = if night {
            go(r - 1, m, false, memo)
        } else {
            let p = m as f64 / r as f64;
            p * go(r - 1, m - 1, true, memo) + (1.0 - p) * go(r - 1, m, true, memo)
        };
        memo.insert((r, m, night), v);
        v
    }
    go(r, m, false, &mut Default::default())
}

fn baseline(r: usize, m: usize, trials: u64, seed: u64, workers: usize) -> EstimateResult {
    let config = GameConfig::new(r, m, 0).unwrap();
    estimate(
        &config,
        "baseline-no-detective",
        &ProfileParams::default(),
        trials,
        seed,
        workers,
    )
    .unwrap()
}

#[test]
fn estimate_at_five_one_matches_eight_fifteenths() {
    let est = baseline(5, 1, 100_000, 1, 0);
    assert!((est.phat - 8.0 / 15.0).abs() <= 4.0 * est.stderr, "{est:?}");
    assert!(est.ci_low <= est.phat && est.phat <= est.ci_high);
}

#[test]
fn no_mafia_never_wins() {
    let est = baseline(50, 0, 1000, 1, 0);
    assert_eq!(est.wins, 0);
}

#[test]
fn zero_trials_and_unknown_profiles_are_rejected() {
    let config = GameConfig::new(10, 1, 0).unwrap();
    assert!(estimate(&config, "baseline-no-detective", &ProfileParams::default(), 0, 1, 1).is_err());
    assert!(matches!(
        estimate(&config, "nobody", &ProfileParams::default(), 10, 1, 1),
        Err(ExperimentError::Engine(_))
    ));
}

#[test]
fn worker_count_never_changes_results() {
    let reference = baseline(300, 12, 20_000, 77, 1);
    for workers in [2, 3, 0] {
        assert_eq!(baseline(300, 12, 20_000, 77, workers), reference);
    }
    let config = GameConfig::new(120, 4, 1).unwrap().with_fidelity(Fidelity::Protocol);
    let staged = |w| estimate(&config, "staged-detective", &ProfileParams::default(), 300, 5, w).unwrap();
    assert_eq!(staged(1), staged(4));
    assert_eq!(
        trajectories(500, 20, 6, 3, 1).unwrap(),
        trajectories(500, 20, 6, 3, 3).unwrap()
    );
}

#[test]
fn wilson_interval_is_calibrated() {
    let mut rng = GameRng::seed_from_u64(31);
    let n = 400u64;
    for p in [0.1, 0.5, 2.0 / 3.0] {
        let reps = 10_000;
        let covered = (0..reps)
            .filter(|_| {
                let wins = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
                let (lo, hi) = wilson_interval(wins, n, Z95);
                lo <= p && p <= hi
            })
            .count() as f64
            / reps as f64;
        assert!((covered - 0.95).abs() <= 0.015, "p = {p}: coverage {covered}");
    }
}

#[test]
fn sweep_rows_follow_the_oracle() {
    let rows = sweep_eta(400, &[0.0, 0.25, 0.5, 1.0, 2.0, 3.0], 20_000, 9, 0).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.mafia).collect::<Vec<_>>(),
        vec![0, 5, 10, 20, 40, 60]
    );
    assert_eq!(rows[0].phat, 0.0);
    for row in &rows {
        let w = oracle_win(row.residents, row.mafia);
        let se = (row.phat * (1.0 - row.phat) / row.trials as f64).sqrt().max(1e-12);
        assert!((row.phat - w).abs() <= 4.0 * se + 1e-12, "{row:?} vs {w}");
    }
    assert!(rows.windows(2).all(|w| w[1].ci_high >= w[0].ci_low));
    assert!(sweep_eta(16, &[3.0], 10, 1, 1).is_err());
}

#[test]
fn thresholds_match_the_oracle_scan() {
    let oracle = (1..=50).find(|&m| oracle_win(100, m) >= 0.5).unwrap();
    assert_eq!(
        threshold(100, ThresholdMethod::ExactDp, 0, 1, 0).unwrap().m_half,
        oracle
    );
    let exact = threshold(400, ThresholdMethod::ExactDp, 0, 1, 0).unwrap();
    let mc = threshold(400, ThresholdMethod::MonteCarlo, 2000, 1, 0).unwrap();
    assert!(exact.m_half.abs_diff(mc.m_half) <= 1, "{exact:?} vs {mc:?}");
    assert!(mc.m_half >= 1 && mc.m_half <= 201);
    assert!(threshold(3, ThresholdMethod::ExactDp, 0, 1, 0).is_err());
}

#[test]
fn power_law_fit_recovers_an_exact_root() {
    let pts: Vec<ThresholdPoint> = [(100, 20), (400, 40), (1600, 80), (6400, 160)]
        .iter()
        .map(|&(r, m)| ThresholdPoint {
            residents: r,
            m_half: m,
            method: ThresholdMethod::ExactDp,
        })
        .collect();
    let fit = fit_power_law(&pts).unwrap();
    assert!((fit.exponent - 0.5).abs() < 1e-12);
    assert!((fit.coefficient - 2.0).abs() < 1e-9);
    assert!(fit.residual >= 0.0 && fit.residual < 1e-20);
    assert!(fit_power_law(&pts[..1]).is_err());
    assert!(fit_power_law(&[pts[0], pts[0], pts[1]]).is_err());
}

#[test]
fn trajectories_at_a_million_players() {
    let runs = trajectories(1_000_000, 1000, 3, 2, 0).unwrap();
    for run in &runs {
        assert_eq!(run.points[0].t, 0);
        assert!((run.points[0].x - 0.999).abs() < 1e-12);
        assert!(run.points.len() > 400_000, "{}", run.points.len());
        assert_eq!(run.tail(100).len(), 100);
        assert_eq!(run.tail(10_000).last(), run.points.last());
    }
}

#[test]
fn early_trajectory_is_steadier_than_the_end() {
    let runs = trajectories(20_000, 150, 200, 8, 0).unwrap();
    let variance = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let early: Vec<f64> = runs.iter().map(|r| r.points[100].x).collect();
    let late: Vec<f64> = runs.iter().map(|r| r.tail(100)[0].x).collect();
    let ratio = variance(&early) / variance(&late);
    assert!(ratio < 1.0, "variance ratio {ratio}");
}

#[test]
fn scenario_validates_its_inputs() {
    let config = GameConfig::new(2000, 100, 100).unwrap();
    let bad = ProfileParams { d: 5, delta: 0.45 };
    assert!(scenario("partition-detective", &config, &bad, 10, 1, 0).is_err());
    assert!(scenario("baseline-no-detective", &config, &ProfileParams::default(), 10, 1, 0).is_err());
    let staged = GameConfig::new(200, 4, 1).unwrap();
    let out = scenario("staged-detective", &staged, &ProfileParams::default(), 200, 1, 0).unwrap();
    assert!((out.citizen_win_rate + out.mafia_win_rate - 1.0).abs() < 1e-12);
    assert!(out.forfeit_rate <= out.mafia_win_rate);
}

#[test]
fn crossvalidation_small_cases() {
    let decided = crossvalidate(10, 5, 1000, 1, 0).unwrap();
    assert_eq!((decided.protocol.phat, decided.reduced.phat), (1.0, 1.0));
    assert!(decided.consistent);
    let small = crossvalidate(3, 1, 20_000, 1, 0).unwrap();
    assert!(small.consistent, "{small:?}");
    assert!((small.reduced.phat - 2.0 / 3.0).abs() <= 4.0 * small.reduced.stderr);
}

#[test]
fn outputs_are_tagged_and_headed() {
    let rows = sweep_eta(100, &[0.5], 100, 4, 1).unwrap();
    let csv = String::from_utf8(render(&rows, OutputFormat::Csv, 4).unwrap()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        format!("# master_seed=4 version={ARTIFACT_VERSION}")
    );
    assert_eq!(lines.next().unwrap(), "eta,R,M,trials,wins,phat,ci_low,ci_high");
    let json: serde_json::Value = serde_json::from_slice(&render(&rows, OutputFormat::Json, 4).unwrap()).unwrap();
    assert_eq!(json["master_seed"], 4);
    assert_eq!(json["rows"][0]["M"], 5);
    assert_eq!(format_sig15(2.0 / 3.0), "0.666666666666667");
    assert_eq!(format_sig15(0.5), "0.5");
}

proptest! {
    #[test]
    fn interval_brackets_the_point_estimate(trials in 1u64..100_000, frac in 0.0f64..=1.0) {
        let wins = ((trials as f64) * frac) as u64;
        let t = Tally { trials, mafia_wins: wins, forfeits: 0 };
        let est = EstimateResult::from_tally(t, 0);
        prop_assert!(est.wins <= est.trials);
        prop_assert!(0.0 <= est.ci_low && est.ci_low <= est.phat && est.phat <= est.ci_high && est.ci_high <= 1.0);
    }

    #[test]
    fn trial_seeds_depend_only_on_seed_and_index(master in any::<u64>(), i in any::<u64>()) {
        prop_assert_eq!(trial_seed(master, i), trial_seed(master, i));
        prop_assert_ne!(trial_seed(master, i), trial_seed(master, i.wrapping_add(1)));
    }
}
