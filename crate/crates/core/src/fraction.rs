//! Exact rationals at the serialization boundary.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rational as it appears in JSON: `{"num": 3, "den": 4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    pub num: i128,
    pub den: i128,
}

impl Fraction {
    pub fn new(num: i128, den: i128) -> Self {
        Fraction { num, den }
    }

    pub fn integer(n: i128) -> Self {
        Fraction { num: n, den: 1 }
    }

    pub fn to_ratio(self) -> Result<Ratio<i128>> {
        if self.den == 0 {
            return Err(Error::Config {
                path: "den".into(),
                message: "zero denominator".into(),
            });
        }
        Ok(Ratio::new(self.num, self.den))
    }

    pub fn to_big(self) -> Result<BigRational> {
        let r = self.to_ratio()?;
        Ok(BigRational::new(
            BigInt::from(*r.numer()),
            BigInt::from(*r.denom()),
        ))
    }
}

impl From<Ratio<i128>> for Fraction {
    fn from(r: Ratio<i128>) -> Self {
        Fraction {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl std::fmt::Display for Fraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

pub fn big(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn big_ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn pow(base: &BigRational, exp: u64) -> BigRational {
    let mut acc = big(1);
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    acc
}

/// `num/den` or a bare integer.
pub fn exact_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with `sig` significant digits, rounded half-even.
///
/// Uses exact integer arithmetic so the output does not depend on the
/// platform's float formatting. Values of magnitude below `1e-6` or at least
/// `1e21` fall back to scientific notation.
pub fn decimal_string(r: &BigRational, sig: usize) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let negative = r.is_negative();
    let a = r.abs();
    // exponent e with 10^e <= a < 10^{e+1}
    let mut e = (a.numer().to_string().len() as i64) - (a.denom().to_string().len() as i64);
    let ten = BigInt::from(10);
    let scale = |k: i64| -> BigRational {
        if k >= 0 {
            big(ten.pow(k as u32))
        } else {
            big_ratio(1, ten.pow((-k) as u32))
        }
    };
    while a < scale(e) {
        e -= 1;
    }
    while a >= scale(e + 1) {
        e += 1;
    }
    // digits = round(a * 10^{sig-1-e})
    let shifted = &a * scale(sig as i64 - 1 - e);
    let (q, rem) = shifted.numer().div_rem(shifted.denom());
    let twice: BigInt = rem * 2;
    let mut digits = match twice.cmp(shifted.denom()) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    };
    if digits.to_string().len() > sig {
        digits /= 10;
        e += 1;
    }
    let mut s = digits.to_string();
    let sign = if negative { "-" } else { "" };
    if !(-6..21).contains(&e) {
        let mantissa = if s.len() > 1 {
            format!("{}.{}", &s[..1], s[1..].trim_end_matches('0'))
        } else {
            s
        };
        let mantissa = mantissa.trim_end_matches('.');
        return format!("{sign}{mantissa}e{e}");
    }
    if e >= 0 {
        let int_len = e as usize + 1;
        if s.len() <= int_len {
            s.push_str(&"0".repeat(int_len - s.len()));
            return format!("{sign}{s}");
        }
        let (i, f) = s.split_at(int_len);
        let f = f.trim_end_matches('0');
        if f.is_empty() {
            format!("{sign}{i}")
        } else {
            format!("{sign}{i}.{f}")
        }
    } else {
        let zeros = "0".repeat((-e - 1) as usize);
        let f = format!("{zeros}{s}");
        format!("{sign}0.{}", f.trim_end_matches('0'))
    }
}

/// Lossy conversion used only for report-only diagnostics.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Smallest rational with denominator `10^9` that is at least `x`.
pub fn ceil_from_f64(x: f64) -> BigRational {
    const SCALE: f64 = 1e9;
    let n = (x * SCALE).ceil();
    big_ratio(BigInt::from(n as i128), BigInt::from(SCALE as i128))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&big_ratio(2, 3), 15), "0.666666666666667");
        assert_eq!(decimal_string(&big_ratio(25, 11), 15), "2.27272727272727");
        assert_eq!(decimal_string(&big(5003), 15), "5003");
        assert_eq!(decimal_string(&big_ratio(-3, 4), 15), "-0.75");
        assert_eq!(decimal_string(&big_ratio(1, 1_000_000_000), 15), "1e-9");
        assert_eq!(decimal_string(&big_ratio(1, 8), 2), "0.12");
        assert_eq!(decimal_string(&big_ratio(3, 8), 2), "0.38");
        assert_eq!(decimal_string(&big_ratio(999_999, 1_000_000), 3), "1");
    }

    #[test]
    fn fraction_json_shape() {
        let f = Fraction::new(-1, 4);
        assert_eq!(serde_json::to_string(&f).unwrap(), r#"{"num":-1,"den":4}"#);
        assert!(Fraction::new(1, 0).to_ratio().is_err());
    }
}
