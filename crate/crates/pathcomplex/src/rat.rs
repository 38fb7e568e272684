//! Exact rational scalars plus parsing and formatting helpers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The exact scalar used everywhere arithmetic must be exact.
pub type Rat = BigRational;

/// `n/d` as an exact rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of truncated parts for extreme magnitudes.
        let n = x.numer().to_f64().unwrap_or(f64::MAX);
        let d = x.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

/// Parses "p/q", "p", or a plain decimal like "0.25" (decimals are exact).
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Input("empty rational".into()));
    }
    if let Some((p, q)) = t.split_once('/') {
        let num: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad numerator in `{s}`")))?;
        let den: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad denominator in `{s}`")))?;
        if den.is_zero() {
            return Err(Error::Input(format!("zero denominator in `{s}`")));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let sign = if whole.trim_start().starts_with('-') { -1 } else { 1 };
        let w: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole
                .parse()
                .map_err(|_| Error::Input(format!("bad decimal `{s}`")))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Input(format!("bad decimal `{s}`")));
        }
        let f: BigInt = frac
            .parse()
            .map_err(|_| Error::Input(format!("bad decimal `{s}`")))?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = Rat::from_integer(w.abs()) + Rat::new(f, scale);
        return Ok(if sign < 0 { -mag } else { mag });
    }
    let n: BigInt = t
        .parse()
        .map_err(|_| Error::Input(format!("bad rational `{s}`")))?;
    Ok(Rat::from_integer(n))
}

/// Canonical "p/q" form ("p" when the denominator is 1).
pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exact integer power, negative exponents included. Panics on 0^negative.
pub fn pow_i(x: &Rat, k: i64) -> Rat {
    if k >= 0 {
        num_traits::pow::pow(x.clone(), k as usize)
    } else {
        let p = num_traits::pow::pow(x.clone(), (-k) as usize);
        assert!(!p.is_zero(), "zero base with negative exponent");
        p.recip()
    }
}
