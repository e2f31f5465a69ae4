//! Exact-rational helpers, certified distances, and exponent specifications.
//!
//! All exact values in this crate are [`BigRational`]s: arbitrary-precision
//! fractions kept fully reduced with a positive denominator (the `num-rational`
//! constructors maintain both invariants). Quantities that cannot be computed
//! exactly — circle distances under an irrational rotation — are carried as
//! [`Distance::Certified`] intervals whose rational endpoints are guaranteed to
//! bracket the true value.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `3^k` as a big integer.
pub fn pow3(k: u64) -> BigInt {
    BigInt::from(3u32).pow(k as u32)
}

/// `2^k` as a big integer.
pub fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

/// Rational-to-float conversion that stays accurate for huge numerators and
/// denominators (plain `to_f64` on the parts overflows to `inf/inf`).
pub fn to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let shift = |x: &BigUint| -> (f64, i64) {
        let bits = x.bits();
        if bits <= 63 {
            (x.to_f64().unwrap(), 0)
        } else {
            let s = bits - 63;
            ((x >> s).to_f64().unwrap(), s as i64)
        }
    };
    let (nm, ns) = shift(num);
    let (dm, ds) = shift(den);
    let v = (nm / dm) * 2f64.powi((ns - ds) as i32);
    if neg {
        -v
    } else {
        v
    }
}

/// Natural log of a positive rational, accurate even when the parts exceed
/// the f64 range.
pub fn ln_rational(r: &BigRational) -> f64 {
    assert!(r.is_positive(), "ln of a non-positive rational");
    ln_biguint(r.numer().magnitude()) - ln_biguint(r.denom().magnitude())
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 63 {
        (x.to_f64().unwrap()).ln()
    } else {
        let s = bits - 63;
        (x >> s).to_f64().unwrap().ln() + s as f64 * std::f64::consts::LN_2
    }
}

/// An exponent `α > 0` for the scaling `n^{1/α} · d(Tⁿx, x)`.
///
/// Exponents of the form `α = log_q(p)` (for example `log₃2`, the Cantor-set
/// dimension) are kept symbolic: when every record time is an exact power
/// `n = p^k`, the factor `n^{1/α} = q^k` is an exact integer and the whole
/// proxy stays rational.
#[derive(Debug, Clone, PartialEq)]
pub enum Alpha {
    /// A plain floating-point exponent.
    Value(f64),
    /// `α = ln(p) / ln(q) = log_q(p)`, kept symbolic. Requires `p, q ≥ 2`.
    LogRatio { p: u64, q: u64 },
}

impl Alpha {
    /// The Cantor-set dimension `log₃2`.
    pub fn log3_2() -> Self {
        Alpha::LogRatio { p: 2, q: 3 }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Alpha::Value(a) => *a,
            Alpha::LogRatio { p, q } => (*p as f64).ln() / (*q as f64).ln(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Alpha::Value(a) if a.is_finite() && *a > 0.0 => Ok(()),
            Alpha::Value(a) => Err(Error::InvalidArgument(format!(
                "alpha must be a positive finite number, got {a}"
            ))),
            Alpha::LogRatio { p, q } if *p >= 2 && *q >= 2 => Ok(()),
            Alpha::LogRatio { p, q } => Err(Error::InvalidArgument(format!(
                "alpha = log({p})/log({q}) requires both bases >= 2"
            ))),
        }
    }

    /// `n^{1/α}` as an exact integer, when possible: for `α = log_q p` and
    /// `n = p^k` this is exactly `q^k`.
    pub fn scaling_factor_exact(&self, n: u64) -> Option<BigInt> {
        match self {
            Alpha::Value(_) => None,
            Alpha::LogRatio { p, q } => {
                if n == 1 {
                    return Some(BigInt::one());
                }
                let mut k = 0u32;
                let mut m = n;
                while m % p == 0 {
                    m /= p;
                    k += 1;
                }
                if m == 1 {
                    Some(BigInt::from(*q).pow(k))
                } else {
                    None
                }
            }
        }
    }

    /// `ln(n^{1/α}) = ln(n)/α`.
    pub fn scaling_log(&self, n: u64) -> f64 {
        (n as f64).ln() / self.as_f64()
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Value(a) => write!(f, "{a}"),
            Alpha::LogRatio { p, q } => write!(f, "log({p})/log({q})"),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    /// Accepts a decimal (`"0.6309"`) or the symbolic form `"log(2)/log(3)"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("log(") {
            let err = || Error::Parse(format!("invalid alpha spec '{s}', expected log(P)/log(Q)"));
            let (p_str, rest) = rest.split_once(')').ok_or_else(err)?;
            let rest = rest.strip_prefix("/log(").ok_or_else(err)?;
            let q_str = rest.strip_suffix(')').ok_or_else(err)?;
            let p: u64 = p_str.trim().parse().map_err(|_| err())?;
            let q: u64 = q_str.trim().parse().map_err(|_| err())?;
            let alpha = Alpha::LogRatio { p, q };
            alpha.validate()?;
            Ok(alpha)
        } else {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::Parse(format!("invalid alpha value '{s}'")))?;
            let alpha = Alpha::Value(v);
            alpha.validate()?;
            Ok(alpha)
        }
    }
}

/// A nonnegative distance, either exactly known or bracketed by a certified
/// rational interval containing the true value.
#[derive(Debug, Clone, PartialEq)]
pub enum Distance {
    Exact(BigRational),
    Certified { lo: BigRational, hi: BigRational },
}

impl Distance {
    pub fn certified(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(!lo.is_negative() && lo <= hi);
        Distance::Certified { lo, hi }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Distance::Exact(_))
    }

    /// True only when the distance is exactly known to be zero.
    pub fn is_zero(&self) -> bool {
        match self {
            Distance::Exact(d) => d.is_zero(),
            Distance::Certified { hi, .. } => hi.is_zero(),
        }
    }

    pub fn lower(&self) -> &BigRational {
        match self {
            Distance::Exact(d) => d,
            Distance::Certified { lo, .. } => lo,
        }
    }

    pub fn upper(&self) -> &BigRational {
        match self {
            Distance::Exact(d) => d,
            Distance::Certified { hi, .. } => hi,
        }
    }

    /// Midpoint as a float.
    pub fn to_f64(&self) -> f64 {
        match self {
            Distance::Exact(d) => to_f64(d),
            Distance::Certified { lo, hi } => {
                let two = BigRational::from_integer(BigInt::from(2));
                to_f64(&((lo + hi) / two))
            }
        }
    }

    /// Half-width of the certified interval (0 for exact values).
    pub fn error_bound(&self) -> f64 {
        match self {
            Distance::Exact(_) => 0.0,
            Distance::Certified { lo, hi } => {
                let two = BigRational::from_integer(BigInt::from(2));
                to_f64(&((hi - lo) / two))
            }
        }
    }

    /// Certified strict comparison: `Some(true)` iff provably `self < other`,
    /// `Some(false)` iff provably `self >= other`, `None` when the intervals
    /// overlap and neither direction can be certified.
    pub fn strictly_less(&self, other: &Distance) -> Option<bool> {
        if self.upper() < other.lower() {
            Some(true)
        } else if self.lower() >= other.upper() {
            Some(false)
        } else if let (Distance::Exact(a), Distance::Exact(b)) = (self, other) {
            Some(a < b)
        } else {
            None
        }
    }

    /// Whether two independently computed distances can denote the same true
    /// value (equal when both exact, overlapping otherwise).
    pub fn consistent_with(&self, other: &Distance) -> bool {
        match (self, other) {
            (Distance::Exact(a), Distance::Exact(b)) => a == b,
            _ => self.lower() <= other.upper() && other.lower() <= self.upper(),
        }
    }

    /// Natural log of the midpoint.
    pub fn ln(&self) -> f64 {
        match self {
            Distance::Exact(d) => ln_rational(d),
            Distance::Certified { lo, hi } => {
                let two = BigRational::from_integer(BigInt::from(2));
                ln_rational(&((lo + hi) / two))
            }
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Exact(d) => write!(f, "{d}"),
            Distance::Certified { .. } => write!(f, "{} ± {:.3e}", self.to_f64(), self.error_bound()),
        }
    }
}

/// Parses a decimal or fraction string (`"0.25"`, `"3/8"`) into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let err = || Error::Parse(format!("invalid rational '{s}'"));
    if let Some((n, d)) = s.split_once('/') {
        let num = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let den = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        Ok(BigRational::new(num, den))
    } else if let Some((int, frac)) = s.split_once('.') {
        let int_part = if int.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| err())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let num = BigInt::from_str(frac).map_err(|_| err())?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = BigRational::new(num, den);
        let whole = BigRational::from_integer(int_part);
        Ok(if s.starts_with('-') {
            whole - frac_part
        } else {
            whole + frac_part
        })
    } else {
        let v = BigInt::from_str(s).map_err(|_| err())?;
        Ok(BigRational::from_integer(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn to_f64_handles_huge_parts() {
        let big = BigInt::from(3u32).pow(2000);
        let r = BigRational::new(&big * 2, &big * 3);
        assert!((to_f64(&r) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(to_f64(&BigRational::zero()), 0.0);
        let neg = BigRational::new(BigInt::from(-1), BigInt::from(3u32).pow(200));
        assert!(to_f64(&neg) < 0.0);
        assert!((to_f64(&neg).ln_1p()).is_finite());
    }

    #[test]
    fn ln_rational_matches_f64_ln() {
        let r = rat(2, 3);
        assert!((ln_rational(&r) - (2f64 / 3.0).ln()).abs() < 1e-14);
        let tiny = BigRational::new(BigInt::from(2), pow3(400));
        let expect = 2f64.ln() - 400.0 * 3f64.ln();
        assert!((ln_rational(&tiny) - expect).abs() < 1e-9);
    }

    #[test]
    fn alpha_exact_scaling() {
        let a = Alpha::log3_2();
        assert_eq!(a.scaling_factor_exact(1), Some(BigInt::one()));
        assert_eq!(a.scaling_factor_exact(8), Some(BigInt::from(27)));
        assert_eq!(a.scaling_factor_exact(6), None);
        assert!((a.as_f64() - 0.6309297535714574).abs() < 1e-15);
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!("log(2)/log(3)".parse::<Alpha>().unwrap(), Alpha::log3_2());
        assert_eq!("1.0".parse::<Alpha>().unwrap(), Alpha::Value(1.0));
        assert!("log(1)/log(3)".parse::<Alpha>().is_err());
        assert!("-2".parse::<Alpha>().is_err());
        assert!("zzz".parse::<Alpha>().is_err());
    }

    #[test]
    fn distance_comparisons() {
        let e = |n, d| Distance::Exact(rat(n, d));
        assert_eq!(e(1, 3).strictly_less(&e(1, 2)), Some(true));
        assert_eq!(e(1, 2).strictly_less(&e(1, 2)), Some(false));
        let c = Distance::certified(rat(1, 4), rat(1, 3));
        assert_eq!(c.strictly_less(&e(1, 2)), Some(true));
        assert_eq!(c.strictly_less(&e(3, 10)), None);
        assert!(c.consistent_with(&e(3, 10)));
        assert!(!c.consistent_with(&e(1, 2)));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/8").unwrap(), rat(3, 8));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("2").unwrap(), rat(2, 1));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a.b").is_err());
    }
}
