use serde::Serialize;

use super::AnalysisError;

/// Closed-form bounds from the detective and no-detective arguments,
/// evaluated at one `(η, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValues {
    pub eta: f64,
    pub d: usize,
    /// Chance the lone detective dies before the transition: `2√η/(1−η)`.
    pub p1: f64,
    /// Mafia win lower bound against `d` detectives: `(η²/72)(η/8d)^d`.
    pub mafia_win_floor: f64,
    /// Citizen win lower bound with `d²` detectives: `1 − d·e^{−d}`.
    pub partition_citizen_floor: f64,
    /// Largest `ε` reached by `η ≤ ε²/8`, i.e. `√(8η)`.
    pub epsilon_for_eta: f64,
    /// `η²/(2 + cη²)` with `c = 1/100`.
    pub h: f64,
}

/// `h(η) = 1/c − 2/(c(2 + cη²))`.
pub fn h_eta(eta: f64, c: f64) -> f64 {
    eta * eta / (2.0 + c * eta * eta)
}

/// `ε²/8`: mafia density that keeps the mafia's win chance below `ε`.
pub fn eta_for_epsilon(epsilon: f64) -> f64 {
    epsilon * epsilon / 8.0
}

pub fn bound_values(eta: f64, d: usize) -> Result<BoundValues, AnalysisError> {
    if !(eta > 0.0 && eta < 1.0) || d == 0 {
        return Err(AnalysisError::Domain(format!(
            "bounds need 0 < eta < 1 and d >= 1, got ({eta}, {d})"
        )));
    }
    let df = d as f64;
    Ok(BoundValues {
        eta,
        d,
        p1: 2.0 * eta.sqrt() / (1.0 - eta),
        mafia_win_floor: eta * eta / 72.0 * (eta / (8.0 * df)).powi(d as i32),
        partition_citizen_floor: 1.0 - df * (-df).exp(),
        epsilon_for_eta: (8.0 * eta).sqrt(),
        h: h_eta(eta, 0.01),
    })
}
