//! Exact drift identities of the reduced chain and the vigilante chain.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::AnalysisError;

/// Arbitrary-precision fraction, always kept in lowest terms.
pub type ExactRational = BigRational;

pub fn ratio(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Constants of the submartingale argument.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConstants {
    pub c: ExactRational,
    pub k: usize,
}

impl Default for AnalysisConstants {
    fn default() -> Self {
        Self { c: ratio(1, 100), k: 2 }
    }
}

/// `X = M(M−1)/R`.
pub fn x_value(r: usize, m: usize) -> Result<ExactRational, AnalysisError> {
    if r == 0 {
        return Err(AnalysisError::Domain("x_value needs R >= 1".into()));
    }
    Ok(BigRational::new(
        BigInt::from(m) * BigInt::from(m.saturating_sub(1)),
        BigInt::from(r),
    ))
}

/// One day-and-night step of `X`; zero on the whole domain.
pub fn x_drift(r: usize, m: usize) -> Result<ExactRational, AnalysisError> {
    if r < 3 || m == 0 || m >= r {
        return Err(AnalysisError::Domain(format!(
            "x_drift needs R >= 3 and 1 <= M <= R-1, got ({r}, {m})"
        )));
    }
    let p_mafia = BigRational::new(BigInt::from(m), BigInt::from(r));
    let p_citizen = BigRational::new(BigInt::from(r - m), BigInt::from(r));
    Ok(p_mafia * x_value(r - 2, m - 1)? + p_citizen * x_value(r - 2, m)? - x_value(r, m)?)
}

/// `D(R, M) = R² − RM + c·M²(M−1)²` over the rationals; `R` may be any integer.
fn y_denominator(r: i64, m: i64, c: &ExactRational) -> ExactRational {
    let r = BigInt::from(r);
    let m = BigInt::from(m);
    let quartic = &m * &m * (&m - 1) * (&m - 1);
    BigRational::from_integer(&r * &r - &r * &m) + c * BigRational::from_integer(quartic)
}

pub fn y_value_with(r: usize, m: usize, c: &ExactRational) -> Result<ExactRational, AnalysisError> {
    let d = y_denominator(r as i64, m as i64, c);
    if !d.is_positive() {
        return Err(AnalysisError::Domain(format!(
            "Y denominator is not positive at ({r}, {m})"
        )));
    }
    let mm = BigInt::from(m) * BigInt::from(m.saturating_sub(1));
    Ok(BigRational::from_integer(&mm * &mm) / d)
}

/// `Y = M²(M−1)² / D(R, M)` with `c = 1/100`.
pub fn y_value(r: usize, m: usize) -> Result<ExactRational, AnalysisError> {
    y_value_with(r, m, &AnalysisConstants::default().c)
}

pub fn y_drift_with(r: usize, m: usize, c: &ExactRational) -> Result<ExactRational, AnalysisError> {
    if m == 0 || r < m + 3 {
        return Err(AnalysisError::Domain(format!(
            "y_drift needs M >= 1 and R >= M + 3, got ({r}, {m})"
        )));
    }
    let p_mafia = BigRational::new(BigInt::from(m), BigInt::from(r));
    let p_citizen = BigRational::new(BigInt::from(r - m), BigInt::from(r));
    Ok(p_mafia * y_value_with(r - 2, m - 1, c)? + p_citizen * y_value_with(r - 2, m, c)? - y_value_with(r, m, c)?)
}

pub fn y_drift(r: usize, m: usize) -> Result<ExactRational, AnalysisError> {
    y_drift_with(r, m, &AnalysisConstants::default().c)
}

/// `100·D(R, M)` for `c = 1/100`: `100R² − 100RM + M²(M−1)²`.
pub fn d_scaled(r: i64, m: i64) -> BigInt {
    let r = BigInt::from(r);
    let m = BigInt::from(m);
    BigInt::from(100) * (&r * &r - &r * &m) + &m * &m * (&m - 1) * (&m - 1)
}

/// `(coefficient, degree in R, degree in M)` of the 30 printed monomials.
const P_TERMS: [(i64, u32, u32); 30] = [
    (1600, 2, 1),
    (-1600, 3, 1),
    (400, 4, 1),
    (-2416, 1, 2),
    (-384, 2, 2),
    (2400, 3, 2),
    (-800, 4, 2),
    (16, 0, 3),
    (4456, 1, 3),
    (-4076, 2, 3),
    (100, 3, 3),
    (400, 4, 3),
    (-72, 0, 4),
    (-1448, 1, 4),
    (2844, 2, 4),
    (-1000, 3, 4),
    (122, 0, 5),
    (-847, 1, 5),
    (64, 2, 5),
    (100, 3, 5),
    (-88, 0, 6),
    (308, 1, 6),
    (-36, 2, 6),
    (12, 0, 7),
    (-66, 1, 7),
    (-12, 2, 7),
    (16, 0, 8),
    (12, 1, 8),
    (-6, 0, 9),
    (1, 1, 9),
];

fn p_poly_i128(r: i64, m: i64) -> Option<i128> {
    let (r, m) = (i128::from(r), i128::from(m));
    let mut total: i128 = 0;
    for &(coef, rd, md) in &P_TERMS {
        let term = i128::from(coef)
            .checked_mul(r.checked_pow(rd)?)?
            .checked_mul(m.checked_pow(md)?)?;
        total = total.checked_add(term)?;
    }
    Some(total)
}

/// The degree-10 polynomial whose sign is the sign of `Y`'s drift.
pub fn p_poly(r: i64, m: i64) -> BigInt {
    if let Some(v) = p_poly_i128(r, m) {
        return BigInt::from(v);
    }
    let (rb, mb) = (BigInt::from(r), BigInt::from(m));
    P_TERMS.iter().fold(BigInt::zero(), |acc, &(coef, rd, md)| {
        acc + BigInt::from(coef) * num_traits::pow(rb.clone(), rd as usize) * num_traits::pow(mb.clone(), md as usize)
    })
}

fn p_positive(r: i64, m: i64) -> bool {
    match p_poly_i128(r, m) {
        Some(v) => v > 0,
        None => p_poly(r, m).is_positive(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MinK {
    pub k: usize,
    /// A point with `M = k − 1` where the polynomial is not positive.
    pub witness: Option<(usize, usize)>,
}

/// Smallest `k` with `P(R, M) > 0` whenever `k ≤ M ≤ R/2` and `R ≤ r_max`;
/// `None` when no `k ≤ r_max/2` works.
pub fn find_min_k(r_max: usize) -> Option<MinK> {
    let mut last_bad: Option<(usize, usize)> = None;
    for m in 0..=r_max / 2 {
        if let Some(r) = (2 * m..=r_max).find(|&r| !p_positive(r as i64, m as i64)) {
            last_bad = Some((r, m));
        }
    }
    let k = last_bad.map_or(0, |(_, m)| m + 1);
    (k <= r_max / 2).then_some(MinK { k, witness: last_bad })
}

/// `Z = M / (V + 1)`.
pub fn z_value(v: usize, m: usize) -> ExactRational {
    BigRational::new(BigInt::from(m), BigInt::from(v + 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZDrift {
    pub enumeration: ExactRational,
    pub closed_form: ExactRational,
}

/// One vigilante-stage round of `Z`: the ballot removes a uniform non-roster
/// resident, then the night removes a uniform citizen.
pub fn z_drift(u: usize, v: usize, m: usize) -> Result<ZDrift, AnalysisError> {
    if u == 0 || m == 0 || v <= m {
        return Err(AnalysisError::Domain(format!(
            "z_drift needs U >= 1, M >= 1, V > M, got ({u}, {v}, {m})"
        )));
    }
    let frac = |a: usize, b: usize| BigRational::new(BigInt::from(a), BigInt::from(b));
    let z = z_value(v, m);
    let enumeration = frac(m, u + m) * frac(v, u + v) * z_value(v - 1, m - 1)
        + frac(m, u + m) * frac(u, u + v) * z_value(v, m - 1)
        + frac(u, u + m) * frac(v, u + v - 1) * z_value(v - 1, m)
        + frac(u, u + m) * frac(u - 1, u + v - 1) * z.clone()
        - z;
    let (ui, vi, mi) = (BigInt::from(u), BigInt::from(v), BigInt::from(m));
    let numerator = &mi * ((&mi - &vi) * (&ui + &vi) + BigInt::one() - &mi);
    let denominator = (&ui + &mi) * (&vi + 1) * (&ui + &vi) * (&ui + &vi - 1);
    Ok(ZDrift {
        enumeration,
        closed_form: BigRational::new(numerator, denominator),
    })
}

pub fn to_f64(x: &ExactRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}
