//! Command-line surface. Flags may also come from a JSON object passed with
//! `--config`; a flag given on the command line wins over the file.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 a failed
//! verification or consistency check.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::analysis::{
    exact_win_probability, run_suite, simulate_reduced_with, to_f64, ExactWinTable, RoundPattern, Suite,
};
use crate::engine::{Faction, Fidelity, GameConfig};
use crate::experiments::{
    crossvalidate, dp_table_rows, estimate, fit_power_law, format_sig15, parallel_tally, render, render_json, scenario,
    sweep_eta, threshold, trajectories, trial_rng, write_atomic, EstimateResult, ExperimentError, OutputFormat, Tally,
    ThresholdMethod, ThresholdRow, TrajectoryRow, DEFAULT_SEED, TAIL_WINDOWS,
};
use crate::strategies::ProfileParams;

#[derive(Debug, Parser)]
#[command(
    name = "mafia-lab",
    version,
    about = "Simulation and verification laboratory for the Mafia game"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the mafia's win probability by Monte Carlo.
    Simulate(Flags),
    /// Exact win probability from the reduced-chain DP.
    Exact(Flags),
    /// Baseline estimates over a grid of eta with M = round(eta * sqrt(R)).
    Sweep(Flags),
    /// Smallest M with win probability at least 1/2, for one or more R.
    Threshold(Flags),
    /// Paths of (t, R_t, M_t, X_t) plus tail windows.
    Trajectory(Flags),
    /// Detective scenarios.
    Scenario(Flags),
    /// Exhaustive identity and oracle checks.
    Verify(Flags),
    /// Protocol engine against the reduced chain.
    Crossvalidate(Flags),
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct Flags {
    /// Initial residents; `threshold` takes a comma-separated list.
    #[arg(long = "R")]
    #[serde(rename = "R", default)]
    r: Option<String>,
    /// Initial mafia members.
    #[arg(long = "M")]
    #[serde(rename = "M", default)]
    m: Option<usize>,
    /// Detectives among the citizens.
    #[arg(long = "D")]
    #[serde(rename = "D", default)]
    d_count: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    trials: Option<u64>,
    #[arg(long)]
    #[serde(default)]
    seed: Option<u64>,
    /// Comma-separated eta values.
    #[arg(long = "eta-grid")]
    #[serde(default)]
    eta_grid: Option<String>,
    #[arg(long)]
    #[serde(default)]
    profile: Option<String>,
    /// Partition count for partition-detective.
    #[arg(long)]
    #[serde(default)]
    d: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    delta: Option<f64>,
    /// Eliminations per cycle as r:d, the first d by day vote.
    #[arg(long)]
    #[serde(default)]
    pattern: Option<String>,
    /// exact or mc.
    #[arg(long)]
    #[serde(default)]
    method: Option<String>,
    /// Worker threads; 0 uses every core. Never changes the output.
    #[arg(long)]
    #[serde(default)]
    workers: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    output: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    #[serde(default)]
    format: Option<String>,
    /// JSON object holding any of these flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// martingales, polynomial, oracle or all.
    #[arg(long)]
    #[serde(default)]
    suite: Option<String>,
    #[arg(long)]
    #[serde(default)]
    rmax: Option<usize>,
    /// Record wall-clock time per check.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default)]
    timings: Option<bool>,
    /// Number of trajectories.
    #[arg(long)]
    #[serde(default)]
    runs: Option<usize>,
    /// protocol or reduced.
    #[arg(long)]
    #[serde(default)]
    fidelity: Option<String>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )*
    };
}

impl Flags {
    fn with_config(mut self) -> Result<Self, ExperimentError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| ExperimentError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let file: Flags = serde_json::from_str(&text)
            .map_err(|e| ExperimentError::Usage(format!("bad config {}: {e}", path.display())))?;
        merge_fields!(self, file; r, m, d_count, trials, seed, eta_grid, profile, d, delta, pattern, method,
            workers, output, format, suite, rmax, timings, runs, fidelity);
        Ok(self)
    }

    /// Names of the flags that were set.
    fn given(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        macro_rules! note {
            ($($f:ident => $name:literal),*) => { $( if self.$f.is_some() { out.push($name); } )* };
        }
        note!(r => "R", m => "M", d_count => "D", trials => "trials", seed => "seed", eta_grid => "eta-grid",
            profile => "profile", d => "d", delta => "delta", pattern => "pattern", method => "method",
            workers => "workers", output => "output", format => "format", suite => "suite", rmax => "rmax",
            timings => "timings", runs => "runs", fidelity => "fidelity");
        out
    }

    fn check_allowed(&self, command: &str, allowed: &[&str]) -> Result<(), ExperimentError> {
        for flag in self.given() {
            if !allowed.contains(&flag) {
                return Err(usage(format!("--{flag} does not apply to {command}")));
            }
        }
        Ok(())
    }

    fn residents(&self) -> Result<usize, ExperimentError> {
        let r = self.r.as_deref().ok_or_else(|| usage("--R is required"))?;
        r.trim()
            .parse()
            .map_err(|_| usage(format!("--R expects a count, got {r:?}")))
    }

    fn residents_list(&self) -> Result<Vec<usize>, ExperimentError> {
        let r = self.r.as_deref().ok_or_else(|| usage("--R is required"))?;
        r.split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| usage(format!("--R expects counts, got {r:?}")))
            })
            .collect()
    }

    fn mafia(&self) -> Result<usize, ExperimentError> {
        self.m.ok_or_else(|| usage("--M is required"))
    }

    fn trials(&self) -> u64 {
        self.trials.unwrap_or(10_000)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn workers(&self) -> usize {
        self.workers.unwrap_or(0)
    }

    fn params(&self) -> ProfileParams {
        let base = ProfileParams::default();
        ProfileParams {
            d: self.d.unwrap_or(base.d),
            delta: self.delta.unwrap_or(base.delta),
        }
    }

    fn format(&self, default: OutputFormat) -> Result<OutputFormat, ExperimentError> {
        self.format.as_deref().map_or(Ok(default), str::parse)
    }

    fn fidelity(&self) -> Result<Fidelity, ExperimentError> {
        match self.fidelity.as_deref() {
            None | Some("reduced") => Ok(Fidelity::Reduced),
            Some("protocol") => Ok(Fidelity::Protocol),
            Some(other) => Err(usage(format!("--fidelity expects protocol or reduced, got {other:?}"))),
        }
    }

    fn pattern(&self) -> Result<RoundPattern, ExperimentError> {
        self.pattern.as_deref().map_or(Ok(RoundPattern::default()), |p| {
            p.parse().map_err(ExperimentError::from)
        })
    }
}

fn usage(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Usage(msg.into())
}

enum Outcome {
    Ok,
    CheckFailed,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if informational { 0 } else { 1 };
        }
    };
    match dispatch(cli.command) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::CheckFailed) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, ExperimentError::Usage(_)) {
                eprintln!("{}", <Cli as clap::CommandFactory>::command().render_usage());
            }
            1
        }
    }
}

const COMMON: [&str; 4] = ["seed", "workers", "output", "format"];

fn allow(extra: &[&'static str]) -> Vec<&'static str> {
    COMMON.iter().chain(extra).copied().collect()
}

fn dispatch(command: Command) -> Result<Outcome, ExperimentError> {
    match command {
        Command::Simulate(f) => {
            let f = f.with_config()?;
            f.check_allowed(
                "simulate",
                &allow(&["R", "M", "D", "trials", "profile", "d", "delta", "pattern", "fidelity"]),
            )?;
            cmd_simulate(&f)
        }
        Command::Exact(f) => {
            let f = f.with_config()?;
            f.check_allowed("exact", &["R", "M", "output", "format"])?;
            cmd_exact(&f)
        }
        Command::Sweep(f) => {
            let f = f.with_config()?;
            f.check_allowed("sweep", &allow(&["R", "eta-grid", "trials"]))?;
            cmd_sweep(&f)
        }
        Command::Threshold(f) => {
            let f = f.with_config()?;
            f.check_allowed("threshold", &allow(&["R", "method", "trials"]))?;
            cmd_threshold(&f)
        }
        Command::Trajectory(f) => {
            let f = f.with_config()?;
            f.check_allowed("trajectory", &allow(&["R", "M", "runs", "pattern"]))?;
            cmd_trajectory(&f)
        }
        Command::Scenario(f) => {
            let f = f.with_config()?;
            f.check_allowed(
                "scenario",
                &allow(&["R", "M", "D", "trials", "profile", "d", "delta", "fidelity"]),
            )?;
            cmd_scenario(&f)
        }
        Command::Verify(f) => {
            let f = f.with_config()?;
            f.check_allowed("verify", &["suite", "rmax", "timings", "output", "format"])?;
            cmd_verify(&f)
        }
        Command::Crossvalidate(f) => {
            let f = f.with_config()?;
            f.check_allowed("crossvalidate", &allow(&["R", "M", "trials"]))?;
            cmd_crossvalidate(&f)
        }
    }
}

/// Writes to `--output` atomically, or to stdout.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), ExperimentError> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json_only(f: &Flags, command: &str) -> Result<(), ExperimentError> {
    match f.format(OutputFormat::Json)? {
        OutputFormat::Json => Ok(()),
        OutputFormat::Csv => Err(usage(format!("{command} writes JSON only"))),
    }
}

fn cmd_simulate(f: &Flags) -> Result<Outcome, ExperimentError> {
    let (r, m) = (f.residents()?, f.mafia()?);
    let config = GameConfig::new(r, m, f.d_count.unwrap_or(0))?.with_fidelity(f.fidelity()?);
    let profile = f.profile.as_deref().unwrap_or("baseline-no-detective");
    let pattern = f.pattern()?;
    let trials = f.trials();
    let est = if pattern == RoundPattern::default() {
        estimate(&config, profile, &f.params(), trials, f.seed(), f.workers())?
    } else {
        // Other elimination patterns exist only on the reduced chain.
        if profile != "baseline-no-detective" || config.fidelity != Fidelity::Reduced {
            return Err(usage("--pattern needs the baseline profile under reduced fidelity"));
        }
        if trials == 0 {
            return Err(usage("trials must be at least 1"));
        }
        let seed = f.seed();
        let tally = parallel_tally(trials, f.workers(), |i| {
            let mut rng = trial_rng(seed, i);
            let out = simulate_reduced_with(r, m, &mut rng, pattern, true)?;
            Ok(Tally::one(out.winner == Faction::Mafia, false))
        })?;
        EstimateResult::from_tally(tally, seed)
    };
    let bytes = match f.format(OutputFormat::Json)? {
        OutputFormat::Json => render_json(&est)?,
        OutputFormat::Csv => render(std::slice::from_ref(&est), OutputFormat::Csv, est.master_seed)?,
    };
    emit(f.output.as_deref(), &bytes)?;
    Ok(Outcome::Ok)
}

fn cmd_exact(f: &Flags) -> Result<Outcome, ExperimentError> {
    let (r, m) = (f.residents()?, f.mafia()?);
    let w = exact_win_probability(r, m)?;
    println!("{w}");
    println!("{}", format_sig15(to_f64(&w)));
    if let Some(path) = f.output.as_deref() {
        let rows = dp_table_rows(&ExactWinTable::build(r, m, true));
        let bytes = match f.format(OutputFormat::Csv)? {
            OutputFormat::Csv => render(&rows, OutputFormat::Csv, 0)?,
            OutputFormat::Json => render(&rows, OutputFormat::Json, 0)?,
        };
        write_atomic(path, &bytes)?;
    }
    Ok(Outcome::Ok)
}

fn parse_grid(s: &str) -> Result<Vec<f64>, ExperimentError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("--eta-grid expects comma-separated numbers, got {s:?}")))
        })
        .collect()
}

fn cmd_sweep(f: &Flags) -> Result<Outcome, ExperimentError> {
    let r = f.residents()?;
    let grid = parse_grid(f.eta_grid.as_deref().unwrap_or("0.25,0.5,1,2,3"))?;
    let format = f.format(OutputFormat::Csv)?;
    let rows = sweep_eta(r, &grid, f.trials(), f.seed(), f.workers())?;
    emit(f.output.as_deref(), &render(&rows, format, f.seed())?)?;
    Ok(Outcome::Ok)
}

fn cmd_threshold(f: &Flags) -> Result<Outcome, ExperimentError> {
    let rs = f.residents_list()?;
    let method: ThresholdMethod = f.method.as_deref().unwrap_or("exact").parse()?;
    let format = f.format(OutputFormat::Csv)?;
    let points = rs
        .iter()
        .map(|&r| threshold(r, method, f.trials(), f.seed(), f.workers()))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<ThresholdRow> = points.iter().map(ThresholdRow::from).collect();
    emit(f.output.as_deref(), &render(&rows, format, f.seed())?)?;
    if points.len() >= 3 {
        let fit = fit_power_law(&points)?;
        eprintln!(
            "fit: M_half = {:.4} * R^{:.4} (log residual {:.3e})",
            fit.coefficient, fit.exponent, fit.residual
        );
    }
    Ok(Outcome::Ok)
}

/// Sibling path for a tail window: `out.csv` becomes `out.tail100.csv`.
fn tail_path(path: &Path, len: usize) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.tail{len}.{}", ext.to_string_lossy()),
        None => format!("{stem}.tail{len}"),
    };
    path.with_file_name(name)
}

fn cmd_trajectory(f: &Flags) -> Result<Outcome, ExperimentError> {
    let (r, m) = (f.residents()?, f.mafia()?);
    let format = f.format(OutputFormat::Csv)?;
    let pattern = f.pattern()?;
    let runs = f.runs.unwrap_or(3);
    let seed = f.seed();
    let paths = if pattern == RoundPattern::default() {
        trajectories(r, m, runs, seed, f.workers())?
    } else {
        if runs == 0 {
            return Err(usage("runs must be at least 1"));
        }
        crate::experiments::parallel_map(runs as u64, f.workers(), |i| {
            let mut rng = trial_rng(seed, i);
            let out = simulate_reduced_with(r, m, &mut rng, pattern, true)?;
            Ok(crate::experiments::TrajectoryRun {
                run: i as usize,
                winner: out.winner,
                points: out.trajectory,
            })
        })?
    };
    let collect = |window: Option<usize>| -> Vec<TrajectoryRow> {
        paths.iter().flat_map(|run| TrajectoryRow::rows(run, window)).collect()
    };
    emit(f.output.as_deref(), &render(&collect(None), format, seed)?)?;
    if let Some(path) = f.output.as_deref() {
        for len in TAIL_WINDOWS {
            write_atomic(&tail_path(path, len), &render(&collect(Some(len)), format, seed)?)?;
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_scenario(f: &Flags) -> Result<Outcome, ExperimentError> {
    json_only(f, "scenario")?;
    let profile = f.profile.as_deref().ok_or_else(|| usage("--profile is required"))?;
    let config = GameConfig::new(f.residents()?, f.mafia()?, f.d_count.unwrap_or(1))?.with_fidelity(f.fidelity()?);
    let result = scenario(profile, &config, &f.params(), f.trials(), f.seed(), f.workers())?;
    emit(f.output.as_deref(), &render_json(&result)?)?;
    Ok(Outcome::Ok)
}

fn cmd_verify(f: &Flags) -> Result<Outcome, ExperimentError> {
    json_only(f, "verify")?;
    let suite: Suite = f.suite.as_deref().unwrap_or("all").parse()?;
    let rmax = f.rmax.unwrap_or(200);
    if rmax < 3 {
        return Err(usage("--rmax must be at least 3"));
    }
    let reports = run_suite(suite, rmax, f.timings.unwrap_or(false));
    emit(f.output.as_deref(), &render_json(&reports)?)?;
    for r in &reports {
        eprintln!(
            "{} {} ({}): {} violations",
            if r.passed() { "PASS" } else { "FAIL" },
            r.check,
            r.domain,
            r.violations.len()
        );
    }
    Ok(if reports.iter().all(|r| r.passed()) {
        Outcome::Ok
    } else {
        Outcome::CheckFailed
    })
}

fn cmd_crossvalidate(f: &Flags) -> Result<Outcome, ExperimentError> {
    json_only(f, "crossvalidate")?;
    let report = crossvalidate(f.residents()?, f.mafia()?, f.trials(), f.seed(), f.workers())?;
    emit(f.output.as_deref(), &render_json(&report)?)?;
    Ok(if report.consistent {
        Outcome::Ok
    } else {
        Outcome::CheckFailed
    })
}
