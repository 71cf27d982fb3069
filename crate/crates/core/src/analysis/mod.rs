//! Exact identities behind the analysis of the game, the win-probability
//! oracle on the reduced chain, and the closed-form bounds.

mod bounds;
mod chain;
mod dp;
mod martingale;
mod report;

use thiserror::Error;

pub use bounds::{bound_values, eta_for_epsilon, h_eta, BoundValues};
pub use chain::{
    sample_reduced_winner, simulate_reduced, simulate_reduced_with, ChainPoint, ReducedOutcome, RoundPattern,
};
pub use dp::{
    exact_threshold, exact_win_probability, exact_win_probability_with, float_threshold, float_win_probability,
    g_bound, single_mafia_series, single_mafia_win, threshold_from_table, within_g_bound, ExactWinTable, FloatWinTable,
    Probability, WinTable,
};
pub use martingale::{
    d_scaled, find_min_k, p_poly, ratio, to_f64, x_drift, x_value, y_drift, y_drift_with, y_value, y_value_with,
    z_drift, z_value, AnalysisConstants, ExactRational, MinK, ZDrift,
};
pub use report::{
    check_dp_monotone, check_g_bound, check_p_positive, check_single_mafia, check_x_drift, check_y_identity,
    check_z_drift, run_suite, CheckReport, Suite, Violation,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("outside the domain: {0}")]
    Domain(String),
}

/// `(R, M)` position of the reduced chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ReducedState {
    #[serde(rename = "R")]
    pub residents: usize,
    #[serde(rename = "M")]
    pub mafia: usize,
}

/// `(U, V, M)` position of the vigilante stage: citizens outside the roster,
/// roster members, mafia.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StageThreeState {
    #[serde(rename = "U")]
    pub outsiders: usize,
    #[serde(rename = "V")]
    pub vigilantes: usize,
    #[serde(rename = "M")]
    pub mafia: usize,
}
