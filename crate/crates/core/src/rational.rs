//! Exact rationals for decoder thresholds and expansion parameters.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Parses `"a/b"`, an integer, or a plain decimal such as `"0.386"`.
///
/// Decimals are converted exactly (`0.386 = 386/1000`), never via `f64`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
        || frac_part.len() > 15
    {
        return Err(bad());
    }
    let den = 10i64.pow(frac_part.len() as u32);
    let int_val: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| bad())?
    };
    let frac_val: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|_| bad())?
    };
    let num = int_val
        .checked_mul(den)
        .and_then(|v| v.checked_add(frac_val))
        .ok_or_else(bad)?;
    Ok(Rational::new(if negative { -num } else { num }, den))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `⌊r⌋` clamped at zero, as a count.
pub fn floor_count(r: &Rational) -> usize {
    if *r <= Rational::zero() {
        0
    } else {
        r.floor().to_integer() as usize
    }
}

pub fn in_open_unit(r: &Rational) -> bool {
    *r > Rational::zero() && *r < Rational::from_integer(1)
}
