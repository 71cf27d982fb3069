//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! shown.

use std::process::Command;
use std::time::{Duration, Instant};

use mafia_core::analysis::*;
use mafia_core::engine::GameConfig;
use mafia_core::experiments::*;
use mafia_core::strategies::ProfileParams;

const SEED: u64 = DEFAULT_SEED;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

/// Bottom-up reduced-chain oracle in floats, majority adjudication,
/// written independently of the library tables.
fn oracle_table(r_max: usize, m_max: usize) -> Vec<Vec<f64>> {
    let decided = |r: usize, m: usize| -> Option<f64> {
        if m == 0 {
            Some(0.0)
        } else if 2 * m >= r {
            Some(1.0)
        } else {
            None
        }
    };
    // day[r][m]: residents about to vote; night[r][m]: about to lose a citizen.
    let mut day = vec![vec![0.0; m_max + 1]; r_max + 1];
    let mut night = vec![vec![0.0; m_max + 1]; r_max + 1];
    for r in 0..=r_max {
        for m in 0..=m_max.min(r) {
            night[r][m] = decided(r, m).unwrap_or_else(|| day[r - 1][m]);
            day[r][m] = decided(r, m).unwrap_or_else(|| {
                let p = m as f64 / r as f64;
                p * night[r - 1][m - 1] + (1.0 - p) * night[r - 1][m]
            });
        }
    }
    day
}

fn oracle_win(r: usize, m: usize) -> f64 {
    oracle_table(r, m)[r][m]
}

fn martingale_identity() -> Verdict {
    let report = check_x_drift(200, false);
    verdict(
        report.passed(),
        format!("{} violations on {}", report.violations.len(), report.domain),
    )
}

fn submartingale_identity() -> Verdict {
    let identity = check_y_identity(200, false);
    let k = find_min_k(2000);
    let positive = check_p_positive(2000, false);
    verdict(
        identity.passed() && positive.passed() && k.is_some(),
        format!(
            "identity: {} violations; P > 0 with k* = {:?}: {} violations",
            identity.violations.len(),
            k.map(|k| k.k),
            positive.violations.len()
        ),
    )
}

fn supermartingale() -> Verdict {
    let report = check_z_drift(60, false);
    verdict(
        report.passed(),
        format!("{} violations on {}", report.violations.len(), report.domain),
    )
}

fn oracle_agreement() -> Verdict {
    // The survival product equals the DP under both adjudication rules; the
    // square-root bound is the literal-rule product's, so it is checked there.
    let majority = check_single_mafia(5000, true, false);
    let literal = check_single_mafia(5000, false, false);
    let bound = check_g_bound(5000, false, false);
    let weak_majority_excess = single_mafia_series(5000, true)
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(n, w)| !within_g_bound(w, *n))
        .count();
    verdict(
        majority.passed() && literal.passed() && bound.passed(),
        format!(
            "DP = product (majority {}, literal {} violations); bound on literal rules: {} violations; \
             under weak-majority stopping {weak_majority_excess} even n exceed the bound",
            majority.violations.len(),
            literal.violations.len(),
            bound.violations.len()
        ),
    )
}

fn monte_carlo_vs_dp() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, m) in [(100, 5), (1000, 31), (10_000, 100)] {
        let w = oracle_win(r, m);
        let lib = float_win_probability(r, m, true).unwrap();
        let est = estimate(
            &GameConfig::new(r, m, 0).unwrap(),
            "baseline-no-detective",
            &ProfileParams::default(),
            100_000,
            SEED,
            0,
        )
        .unwrap();
        let z = (est.phat - w).abs() / est.stderr;
        ok &= z <= 4.0 && (lib - w).abs() < 1e-9;
        parts.push(format!("({r},{m}) phat {:.4} vs {w:.4}, {z:.2} se", est.phat));
    }
    verdict(ok, parts.join("; "))
}

fn protocol_vs_reduced() -> Verdict {
    let a = crossvalidate(101, 10, 100_000, SEED, 0).unwrap();
    let b = crossvalidate(3, 1, 100_000, SEED, 0).unwrap();
    verdict(
        a.consistent && b.consistent,
        format!(
            "(101,10): {:.4} vs {:.4}, diff {:.2} combined se; (3,1): {:.4} vs {:.4}, diff {:.2} combined se",
            a.protocol.phat,
            a.reduced.phat,
            a.difference / a.combined_stderr,
            b.protocol.phat,
            b.reduced.phat,
            b.difference / b.combined_stderr
        ),
    )
}

fn sqrt_threshold() -> Verdict {
    let points: Vec<ThresholdPoint> = [400, 1600, 6400, 25_600]
        .iter()
        .map(|&r| threshold(r, ThresholdMethod::ExactDp, 0, SEED, 0).unwrap())
        .collect();
    // The two smaller thresholds are re-derived from the test oracle.
    let agree = points[..2].iter().all(|p| {
        let table = oracle_table(p.residents, p.m_half);
        table[p.residents][p.m_half] >= 0.5 && table[p.residents][p.m_half - 1] < 0.5
    });
    let fit = fit_power_law(&points).unwrap();
    let ms: Vec<usize> = points.iter().map(|p| p.m_half).collect();
    verdict(
        agree && (0.45..=0.55).contains(&fit.exponent),
        format!("M_half {ms:?}, exponent {:.4}, c {:.3}", fit.exponent, fit.coefficient),
    )
}

fn small_density_tail() -> Verdict {
    let eta = eta_for_epsilon(0.5);
    let m = (eta * 100.0).ceil() as usize;
    let est = estimate(
        &GameConfig::new(10_000, m, 0).unwrap(),
        "baseline-no-detective",
        &ProfileParams::default(),
        10_000,
        SEED,
        0,
    )
    .unwrap();
    verdict(
        eta == 1.0 / 32.0 && m == 4 && est.phat <= 0.5,
        format!("eta {eta}, M {m}, mafia win rate {:.4}", est.phat),
    )
}

fn detective_direction() -> Verdict {
    let run = |m| {
        let config = GameConfig::new(1000, m, 1).unwrap();
        scenario("staged-detective", &config, &ProfileParams::default(), 10_000, SEED, 0).unwrap()
    };
    let (high, low) = (run(20), run(5));
    let baseline = 1.0 - oracle_win(1000, 20);
    let lift = (high.citizen_win_rate - baseline) / high.estimate.stderr;
    let gap = (high.mafia_win_rate - low.mafia_win_rate) / high.estimate.stderr.hypot(low.estimate.stderr);
    verdict(
        lift > 4.0 && gap > 4.0,
        format!(
            "M=20 citizens {:.4} vs baseline {baseline:.4} ({lift:.1} se); mafia M=5 {:.4} vs M=20 {:.4} ({gap:.1} se)",
            high.citizen_win_rate, low.mafia_win_rate, high.mafia_win_rate
        ),
    )
}

fn partition_detectives() -> Verdict {
    let config = GameConfig::new(2000, 100, 100).unwrap();
    let params = ProfileParams { d: 10, delta: 0.45 };
    let out = scenario("partition-detective", &config, &params, 2000, SEED, 0).unwrap();
    let bound = bound_values(0.05, 10).unwrap();
    verdict(
        out.citizen_win_rate >= 0.99,
        format!(
            "citizen win rate {:.4} (stated bound {:.5})",
            out.citizen_win_rate, bound.partition_citizen_floor
        ),
    )
}

fn no_crypto_detective() -> Verdict {
    let config = GameConfig::new(1440, 19, 1).unwrap();
    let out = scenario(
        "nocrypto-detective",
        &config,
        &ProfileParams::default(),
        100_000,
        SEED,
        0,
    )
    .unwrap();
    verdict(
        out.citizen_win_rate >= 1.0 / 108.0,
        format!(
            "citizen win rate {:.4} vs 1/108 = {:.4}",
            out.citizen_win_rate,
            1.0 / 108.0
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str]); 5] = [
        (
            "engine",
            &[
                "simulate",
                "--R",
                "120",
                "--M",
                "6",
                "--trials",
                "400",
                "--fidelity",
                "protocol",
            ],
        ),
        (
            "strategies",
            &[
                "scenario",
                "--profile",
                "nocrypto-detective",
                "--R",
                "400",
                "--M",
                "8",
                "--trials",
                "300",
            ],
        ),
        ("analysis", &["verify", "--suite", "all", "--rmax", "30"]),
        (
            "experiments",
            &["trajectory", "--R", "5000", "--M", "50", "--runs", "4"],
        ),
        (
            "cli",
            &[
                "sweep",
                "--R",
                "2500",
                "--eta-grid",
                "0.5,1,2",
                "--trials",
                "4000",
                "--format",
                "json",
            ],
        ),
    ];
    let mut failures = Vec::new();
    for (module, args) in cases {
        let outputs: Vec<Vec<u8>> = ["1", "3"]
            .iter()
            .enumerate()
            .map(|(i, workers)| {
                let path = dir.path().join(format!("{module}{i}"));
                let status = Command::new(env!("CARGO_BIN_EXE_mafia-lab"))
                    .args(args)
                    .args(["--output", path.to_str().unwrap()])
                    .args(if module == "analysis" {
                        vec![]
                    } else {
                        vec!["--workers", workers]
                    })
                    .stderr(std::process::Stdio::null())
                    .status()
                    .unwrap();
                assert!(status.success(), "{module}: {status}");
                std::fs::read(&path).unwrap()
            })
            .collect();
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            failures.push(module);
        }
    }
    verdict(
        failures.is_empty(),
        format!("byte-identical across reruns and worker counts; mismatches: {failures:?}"),
    )
}

type Criterion = (u32, &'static str, Option<Duration>, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 12] = [
        (
            1,
            "martingale identity",
            Some(Duration::from_secs(5)),
            martingale_identity,
        ),
        (
            2,
            "submartingale identity and P > 0",
            Some(Duration::from_secs(120)),
            submartingale_identity,
        ),
        (
            3,
            "supermartingale drift",
            Some(Duration::from_secs(30)),
            supermartingale,
        ),
        (
            4,
            "single-mafia oracle agreement",
            Some(Duration::from_secs(10)),
            oracle_agreement,
        ),
        (
            5,
            "Monte Carlo vs DP",
            Some(Duration::from_secs(120)),
            monte_carlo_vs_dp,
        ),
        (
            6,
            "protocol vs reduced chain",
            Some(Duration::from_secs(300)),
            protocol_vs_reduced,
        ),
        (
            7,
            "square-root threshold",
            Some(Duration::from_secs(600)),
            sqrt_threshold,
        ),
        (8, "small-density tail", None, small_density_tail),
        (9, "single detective direction", None, detective_direction),
        (10, "partition detectives", None, partition_detectives),
        (11, "detective without cryptography", None, no_crypto_detective),
        (12, "determinism", None, determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || f == &n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let ok = v.passed && in_time;
        if !ok {
            failed += 1;
        }
        let limit_note = limit.map_or(String::new(), |l| format!(" / limit {} s", l.as_secs()));
        println!(
            "criterion {n:>2} {}: {name}: {} [{:.1} s{limit_note}]",
            if ok { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
