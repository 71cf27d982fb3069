//! Exhaustive verification scans, reported as `{check, domain, violations, elapsed}`.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::dp::{single_mafia_series, within_g_bound, ExactWinTable};
use super::martingale::{d_scaled, find_min_k, p_poly, x_drift, y_drift, z_drift};
use super::AnalysisError;

/// A point where a check failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(rename = "U", skip_serializing_if = "Option::is_none")]
    pub u: Option<usize>,
    #[serde(rename = "V", skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    pub detail: String,
}

impl Violation {
    fn at(r: usize, m: usize, detail: impl Into<String>) -> Self {
        Self {
            r: Some(r),
            m: Some(m),
            u: None,
            v: None,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub domain: String,
    pub violations: Vec<Violation>,
    /// Wall-clock seconds; `null` unless timings were requested, so reports
    /// stay byte-identical across runs.
    pub elapsed: Option<f64>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Violations listed per report before the scan only counts.
const MAX_LISTED: usize = 50;

struct Scan {
    check: &'static str,
    domain: String,
    violations: Vec<Violation>,
    extra: usize,
    started: Option<Instant>,
}

impl Scan {
    fn new(check: &'static str, domain: String, timings: bool) -> Self {
        Self {
            check,
            domain,
            violations: Vec::new(),
            extra: 0,
            started: timings.then(Instant::now),
        }
    }

    fn flag(&mut self, violation: Violation) {
        if self.violations.len() < MAX_LISTED {
            self.violations.push(violation);
        } else {
            self.extra += 1;
        }
    }

    fn finish(mut self) -> CheckReport {
        if self.extra > 0 {
            self.violations.push(Violation {
                r: None,
                m: None,
                u: None,
                v: None,
                detail: format!("{} further violations not listed", self.extra),
            });
        }
        CheckReport {
            check: self.check.into(),
            domain: self.domain,
            violations: self.violations,
            elapsed: self.started.map(|s| s.elapsed().as_secs_f64()),
        }
    }
}

/// `X` has zero drift for `3 ≤ R ≤ r_max`, `1 ≤ M ≤ R−1`.
pub fn check_x_drift(r_max: usize, timings: bool) -> CheckReport {
    let mut scan = Scan::new("x_drift_zero", format!("3 <= R <= {r_max}, 1 <= M <= R-1"), timings);
    for r in 3..=r_max {
        for m in 1..r {
            match x_drift(r, m) {
                Ok(d) if d.is_zero() => {}
                Ok(d) => scan.flag(Violation::at(r, m, format!("drift {d}"))),
                Err(e) => scan.flag(Violation::at(r, m, e.to_string())),
            }
        }
    }
    scan.finish()
}

/// `Y`'s drift equals `P(R, M)/(100·R·D·D·D)` with `c = 1/100`, checked in
/// integer-scaled form `drift · R·D̂(R,M)·D̂(R−2,M)·D̂(R−2,M−1) = 10⁴·P(R, M)`
/// where `D̂ = 100·D`.
pub fn check_y_identity(r_max: usize, timings: bool) -> CheckReport {
    let mut scan = Scan::new("y_drift_polynomial", format!("2 <= M, M + 3 <= R <= {r_max}"), timings);
    let scale = BigInt::from(10_000);
    for m in 2..r_max.saturating_sub(2) {
        for r in m + 3..=r_max {
            let drift = match y_drift(r, m) {
                Ok(d) => d,
                Err(e) => {
                    scan.flag(Violation::at(r, m, e.to_string()));
                    continue;
                }
            };
            let (ri, mi) = (r as i64, m as i64);
            let factor = BigInt::from(r) * d_scaled(ri, mi) * d_scaled(ri - 2, mi) * d_scaled(ri - 2, mi - 1);
            let lhs = drift * factor;
            let rhs = &scale * p_poly(ri, mi);
            if !lhs.is_integer() || *lhs.numer() != rhs {
                scan.flag(Violation::at(r, m, format!("scaled drift {lhs} != 10^4 P = {rhs}")));
            }
        }
    }
    scan.finish()
}

/// `P(R, M) > 0` for `k* ≤ M ≤ R/2`, `R ≤ r_max`, with `k*` from
/// [`find_min_k`]; also reports `k*` itself.
pub fn check_p_positive(r_max: usize, timings: bool) -> CheckReport {
    let min_k = find_min_k(r_max);
    let k = min_k.map_or(usize::MAX, |mk| mk.k);
    let mut scan = Scan::new(
        "p_poly_positive",
        match min_k {
            Some(mk) => format!("k* = {} <= M <= R/2, R <= {r_max}", mk.k),
            None => format!("no k* <= {} found for R <= {r_max}", r_max / 2),
        },
        timings,
    );
    if min_k.is_none() {
        scan.flag(Violation {
            r: None,
            m: None,
            u: None,
            v: None,
            detail: "find_min_k found no threshold".into(),
        });
    }
    for m in k..=r_max / 2 {
        for r in 2 * m..=r_max {
            if !p_poly(r as i64, m as i64).is_positive() {
                scan.flag(Violation::at(r, m, "P(R, M) <= 0"));
            }
        }
    }
    scan.finish()
}

/// Closed form equals the four-way enumeration and is `≤ 0` for
/// `1 ≤ U, M ≤ n`, `M < V ≤ n`.
pub fn check_z_drift(n: usize, timings: bool) -> CheckReport {
    let mut scan = Scan::new(
        "z_drift_supermartingale",
        format!("1 <= U, M <= {n}, M < V <= {n}"),
        timings,
    );
    for u in 1..=n {
        for m in 1..=n {
            for v in m + 1..=n {
                let flag = |detail: String| Violation {
                    r: None,
                    m: Some(m),
                    u: Some(u),
                    v: Some(v),
                    detail,
                };
                match z_drift(u, v, m) {
                    Ok(z) if z.enumeration != z.closed_form => scan.flag(flag(format!(
                        "enumeration {} != closed form {}",
                        z.enumeration, z.closed_form
                    ))),
                    Ok(z) if z.closed_form.is_positive() => {
                        scan.flag(flag(format!("positive drift {}", z.closed_form)))
                    }
                    Ok(_) => {}
                    Err(e) => scan.flag(flag(e.to_string())),
                }
            }
        }
    }
    scan.finish()
}

/// The DP with one mafia member equals the survival product, under the
/// chosen adjudication rule.
pub fn check_single_mafia(r_max: usize, majority: bool, timings: bool) -> CheckReport {
    let rule = if majority { "majority" } else { "literal" };
    let mut scan = Scan::new(
        "dp_single_mafia_product",
        format!("1 <= R <= {r_max}, M = 1, {rule} adjudication"),
        timings,
    );
    let table = ExactWinTable::build(r_max, 1, majority);
    let series = single_mafia_series(r_max, majority);
    for (r, product) in series.iter().enumerate().skip(1) {
        let dp = table.get(r, 1).expect("in range");
        if dp != product {
            scan.flag(Violation::at(r, 1, format!("DP {dp} != product {product}")));
        }
    }
    scan.finish()
}

/// `single_mafia_win(n) ≤ √(2/(n+1))` for `1 ≤ n ≤ n_max`.
pub fn check_g_bound(n_max: usize, majority: bool, timings: bool) -> CheckReport {
    let rule = if majority { "majority" } else { "literal" };
    let mut scan = Scan::new(
        "single_mafia_g_bound",
        format!("1 <= n <= {n_max}, {rule} adjudication"),
        timings,
    );
    let series = single_mafia_series(n_max, majority);
    for (n, w) in series.iter().enumerate().skip(1) {
        if !within_g_bound(w, n) {
            scan.flag(Violation::at(n, 1, format!("{w} exceeds sqrt(2/(n+1))")));
        }
    }
    scan.finish()
}

/// `w` is nondecreasing in `M` and nonincreasing in `R` over equal parity.
pub fn check_dp_monotone(r_max: usize, timings: bool) -> CheckReport {
    let mut scan = Scan::new("dp_monotone", format!("1 <= R <= {r_max}, 0 <= M <= R"), timings);
    let table = ExactWinTable::build(r_max, r_max, true);
    for r in 1..=r_max {
        for m in 1..=r {
            let (here, below) = (table.get(r, m).unwrap(), table.get(r, m - 1).unwrap());
            if here < below {
                scan.flag(Violation::at(r, m, "decreases in M"));
            }
            if r + 2 <= r_max {
                if let Some(next) = table.get(r + 2, m) {
                    if next > here {
                        scan.flag(Violation::at(r, m, "increases from R to R + 2"));
                    }
                }
            }
        }
    }
    scan.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Martingales,
    Polynomial,
    Oracle,
    All,
}

impl std::str::FromStr for Suite {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "martingales" => Ok(Suite::Martingales),
            "polynomial" => Ok(Suite::Polynomial),
            "oracle" => Ok(Suite::Oracle),
            "all" => Ok(Suite::All),
            other => Err(AnalysisError::Domain(format!(
                "unknown suite {other:?}; expected martingales, polynomial, oracle or all"
            ))),
        }
    }
}

/// Runs a named group of checks. `rmax` bounds the drift scans; the other
/// domains scale with it: `P > 0` up to `10·rmax`, the single-mafia oracle
/// up to `25·rmax`, monotonicity up to `2·rmax`, `Z` up to `min(rmax, 60)`.
pub fn run_suite(suite: Suite, rmax: usize, timings: bool) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    if matches!(suite, Suite::Martingales | Suite::All) {
        reports.push(check_x_drift(rmax, timings));
        reports.push(check_y_identity(rmax, timings));
        reports.push(check_z_drift(rmax.min(60), timings));
    }
    if matches!(suite, Suite::Polynomial | Suite::All) {
        reports.push(check_p_positive(rmax * 10, timings));
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        reports.push(check_single_mafia(rmax * 25, true, timings));
        reports.push(check_single_mafia(rmax * 25, false, timings));
        reports.push(check_g_bound(rmax * 25, false, timings));
        reports.push(check_dp_monotone(rmax * 2, timings));
    }
    reports
}
