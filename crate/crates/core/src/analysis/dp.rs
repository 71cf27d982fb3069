//! Mafia win probability on the reduced `(R, M)` chain by backward
//! induction. Adjudication is applied after every single elimination.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::martingale::ExactRational;
use super::AnalysisError;
use crate::engine::{adjudicate_counts, Faction};

/// Arithmetic the table can be filled in.
pub trait Probability: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    /// `(m/r)·a + ((r−m)/r)·b`.
    fn mix(m: usize, r: usize, a: &Self, b: &Self) -> Self;
}

impl Probability for ExactRational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn mix(m: usize, r: usize, a: &Self, b: &Self) -> Self {
        let weighted = a * BigInt::from(m) + b * BigInt::from(r - m);
        weighted / BigInt::from(r)
    }
}

impl Probability for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn mix(m: usize, r: usize, a: &Self, b: &Self) -> Self {
        (m as f64 * a + (r - m) as f64 * b) / r as f64
    }
}

/// `w(r, m)` at the start of a residents round for every `r ≤ r_max`,
/// `m ≤ min(r, m_max)`.
#[derive(Debug, Clone)]
pub struct WinTable<P> {
    r_max: usize,
    m_max: usize,
    majority: bool,
    day: Vec<P>,
}

pub type ExactWinTable = WinTable<ExactRational>;
pub type FloatWinTable = WinTable<f64>;

fn terminal<P: Probability>(r: usize, m: usize, majority: bool) -> Option<P> {
    adjudicate_counts(r, m, majority).map(|f| if f == Faction::Mafia { P::one() } else { P::zero() })
}

impl<P: Probability> WinTable<P> {
    pub fn build(r_max: usize, m_max: usize, majority: bool) -> Self {
        let width = m_max + 1;
        let mut day: Vec<P> = Vec::with_capacity((r_max + 1) * width);
        for r in 0..=r_max {
            for m in 0..width {
                let value = if m > r || r == 0 {
                    P::zero()
                } else if let Some(v) = terminal(r, m, majority) {
                    v
                } else {
                    let night = |mafia: usize| -> P {
                        // Night position (r−1, mafia): adjudicate, else a citizen dies.
                        terminal(r - 1, mafia, majority).unwrap_or_else(|| day[(r - 2) * width + mafia].clone())
                    };
                    P::mix(m, r, &night(m - 1), &night(m))
                };
                day.push(value);
            }
        }
        Self {
            r_max,
            m_max,
            majority,
            day,
        }
    }

    pub fn get(&self, r: usize, m: usize) -> Option<&P> {
        (r <= self.r_max && m <= self.m_max && m <= r).then(|| &self.day[r * (self.m_max + 1) + m])
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn majority(&self) -> bool {
        self.majority
    }
}

/// Probability that the mafia wins from `(R, M)` with majority adjudication.
pub fn exact_win_probability(r: usize, m: usize) -> Result<ExactRational, AnalysisError> {
    exact_win_probability_with(r, m, true)
}

pub fn exact_win_probability_with(r: usize, m: usize, majority: bool) -> Result<ExactRational, AnalysisError> {
    if m > r {
        return Err(AnalysisError::Domain(format!("M = {m} exceeds R = {r}")));
    }
    let table = ExactWinTable::build(r, m, majority);
    Ok(table.get(r, m).cloned().expect("in range"))
}

/// Float DP value, for sizes where exact fractions are too large.
pub fn float_win_probability(r: usize, m: usize, majority: bool) -> Result<f64, AnalysisError> {
    if m > r {
        return Err(AnalysisError::Domain(format!("M = {m} exceeds R = {r}")));
    }
    Ok(*FloatWinTable::build(r, m, majority).get(r, m).expect("in range"))
}

/// A lone mafia member survives every day vote with probability `1 − 1/R_t`
/// and the night removes a citizen; the product runs until the game is
/// decided. Majority adjudication ends it at `R_t = 2`, the literal rules
/// play that last coin flip out.
pub fn single_mafia_win(n: usize, majority: bool) -> ExactRational {
    if n == 0 {
        return Zero::zero();
    }
    let stop = if majority { 2 } else { 1 };
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    let mut r = n;
    while r > stop {
        num *= BigInt::from(r - 1);
        den *= BigInt::from(r);
        r -= 2;
    }
    BigRational::new(num, den)
}

/// [`single_mafia_win`] for every `n ≤ n_max`, one factor per step.
pub fn single_mafia_series(n_max: usize, majority: bool) -> Vec<ExactRational> {
    let stop = if majority { 2 } else { 1 };
    let mut out: Vec<ExactRational> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let w = if n == 0 {
            Zero::zero()
        } else if n <= stop {
            One::one()
        } else {
            let factor = BigRational::new(BigInt::from(n - 1), BigInt::from(n));
            // `n − 2 = 0` is the empty product, not the zero-player game.
            if n == 2 {
                factor
            } else {
                &out[n - 2] * factor
            }
        };
        out.push(w);
    }
    out
}

/// `√(2/(n+1))`.
pub fn g_bound(n: usize) -> f64 {
    (2.0 / (n as f64 + 1.0)).sqrt()
}

/// `w ≤ √(2/(n+1))`, decided exactly as `w²·(n+1) ≤ 2`.
pub fn within_g_bound(w: &ExactRational, n: usize) -> bool {
    // Denominators are positive, so compare cross-multiplied integers.
    let (num, den) = (w.numer(), w.denom());
    num * num * BigInt::from(n + 1) <= den * den * BigInt::from(2)
}

/// Smallest `M` with `w(R, M) ≥ 1/2`, from a float table whose `m_max`
/// covers the threshold.
pub fn threshold_from_table(table: &FloatWinTable, r: usize) -> Option<usize> {
    (0..=table.m_max().min(r)).find(|&m| table.get(r, m).is_some_and(|w| *w >= 0.5))
}

/// Smallest `M` with `w(R, M) ≥ 1/2`, growing the table as needed.
pub fn float_threshold(r: usize, majority: bool) -> usize {
    let mut m_max = 8usize.min(r);
    loop {
        let table = FloatWinTable::build(r, m_max, majority);
        if let Some(m) = threshold_from_table(&table, r) {
            return m;
        }
        if m_max >= r {
            return r;
        }
        m_max = (m_max * 2).min(r);
    }
}

/// Exact counterpart of [`float_threshold`].
pub fn exact_threshold(r: usize, majority: bool) -> usize {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut m_max = 8usize.min(r);
    loop {
        let table = ExactWinTable::build(r, m_max, majority);
        if let Some(m) = (0..=m_max).find(|&m| table.get(r, m).is_some_and(|w| *w >= half)) {
            return m;
        }
        if m_max >= r {
            return r;
        }
        m_max = (m_max * 2).min(r);
    }
}
