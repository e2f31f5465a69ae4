//! Binary codings of middle-thirds Cantor-set points, with exact arithmetic.
//!
//! Every point of the Cantor set `C` has a unique coding `(x_k)` over `{0,1}`:
//! the k-th symbol says whether the point sits in the left or right third at
//! level k, so that `x = Σ_k 2·x_k/3^k`. This module represents the
//! *eventually periodic* codings — the only ones the rest of the crate ever
//! produces — as a finite preperiod plus a repeating period, which keeps every
//! point value and every distance an exact rational.
//!
//! Codes are kept in canonical form (primitive period, no mergeable tail), so
//! two codes denote the same digit sequence iff they are `==`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

use crate::numeric::pow3;
use crate::{Error, Result};

/// An eventually periodic binary coding of a Cantor-set point.
///
/// Always canonical: the period is primitive and the preperiod cannot be
/// shortened by rotating the period into it. The constructor canonicalizes,
/// so equality of `SymbolCode`s is equality of the coded digit sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolCode {
    pre: Vec<u8>,
    per: Vec<u8>,
}

impl SymbolCode {
    /// Builds a code from preperiod and period digits, canonicalizing.
    ///
    /// The period must be nonempty and all digits must be 0 or 1.
    pub fn new(pre: Vec<u8>, per: Vec<u8>) -> Result<Self> {
        if per.is_empty() {
            return Err(Error::InvalidArgument(
                "period must be nonempty (a terminating code uses period [0])".into(),
            ));
        }
        if pre.iter().chain(per.iter()).any(|&d| d > 1) {
            return Err(Error::InvalidArgument("digits must be 0 or 1".into()));
        }
        let mut code = SymbolCode { pre, per };
        code.canonicalize();
        Ok(code)
    }

    /// The point `0 = (000…)`.
    pub fn zero() -> Self {
        SymbolCode {
            pre: vec![],
            per: vec![0],
        }
    }

    /// The point `1 = (111…)`.
    pub fn one() -> Self {
        SymbolCode {
            pre: vec![],
            per: vec![1],
        }
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.pre
    }

    pub fn period(&self) -> &[u8] {
        &self.per
    }

    /// Digit at 0-based position `i` of the coded sequence.
    pub fn digit(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.per[(i - self.pre.len()) % self.per.len()]
        }
    }

    /// Position of the first digit where `self` and `other` differ, or `None`
    /// if the coded sequences are identical.
    pub fn first_difference(&self, other: &SymbolCode) -> Option<usize> {
        if self == other {
            return None;
        }
        // Differing eventually periodic sequences must differ within the
        // common preperiod plus one lcm of the periods; a linear scan over
        // that range always terminates.
        let pre = self.pre.len().max(other.pre.len());
        let lcm = num_integer::lcm(self.per.len(), other.per.len());
        (0..pre + lcm).find(|&i| self.digit(i) != other.digit(i))
    }

    fn canonicalize(&mut self) {
        // Primitive period: if the period is a repetition of a shorter word,
        // shrink it to that word.
        let q = self.per.len();
        for m in 1..q {
            if q % m == 0 && (m..q).all(|i| self.per[i] == self.per[i % m]) {
                self.per.truncate(m);
                break;
            }
        }
        // Mergeable tail: while the last preperiod digit equals the last
        // period digit, the preperiod can be shortened by rotating the
        // period right by one.
        while let Some(&last) = self.pre.last() {
            if last == *self.per.last().unwrap() {
                self.pre.pop();
                let d = self.per.pop().unwrap();
                self.per.insert(0, d);
            } else {
                break;
            }
        }
    }

    /// The exact value `Σ_k 2·x_k/3^k ∈ [0, 1]` of the coded point.
    ///
    /// The periodic tail is summed in closed form: with preperiod digits
    /// `d_1…d_p` and period digits `e_1…e_q`,
    /// `x = 2·(A·(3^q − 1) + E) / (3^p·(3^q − 1))` where `A = Σ d_i 3^{p−i}`
    /// and `E = Σ e_i 3^{q−i}`.
    pub fn value(&self) -> BigRational {
        let p = self.pre.len() as u64;
        let q = self.per.len() as u64;
        let mut a = BigInt::zero();
        for &d in &self.pre {
            a = a * 3 + d;
        }
        let mut e = BigInt::zero();
        for &d in &self.per {
            e = e * 3 + d;
        }
        let tail = pow3(q) - 1;
        let num = 2 * (a * &tail + e);
        let den = pow3(p) * tail;
        BigRational::new(num, den)
    }

    /// Exact Euclidean distance `|x − y|` between the coded points.
    pub fn distance(&self, other: &SymbolCode) -> BigRational {
        (self.value() - other.value()).abs()
    }
}

impl fmt::Display for SymbolCode {
    /// Text form `pre(period)`, e.g. `"01(0)"` for `[0,1,0,0,0,…]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.pre {
            write!(f, "{d}")?;
        }
        write!(f, "(")?;
        for d in &self.per {
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for SymbolCode {
    type Err = Error;

    /// Parses `"01(0)"`, `"(1)"`, or a bare digit string `"011"` (implicit
    /// period `(0)`). Any character outside `{0, 1, (, )}` is rejected.
    fn from_str(s: &str) -> Result<Self> {
        let err = |msg: &str| Error::Parse(format!("invalid code '{s}': {msg}"));
        if s.is_empty() {
            return Err(err("empty"));
        }
        let digits = |part: &str| -> Result<Vec<u8>> {
            part.bytes()
                .map(|b| match b {
                    b'0' => Ok(0),
                    b'1' => Ok(1),
                    _ => Err(err("digits must be 0 or 1")),
                })
                .collect()
        };
        match s.find('(') {
            None => {
                let pre = digits(s)?;
                SymbolCode::new(pre, vec![0])
            }
            Some(open) => {
                let close = s.rfind(')').ok_or_else(|| err("unbalanced parentheses"))?;
                if close != s.len() - 1 || close < open {
                    return Err(err("unbalanced parentheses"));
                }
                let pre = digits(&s[..open])?;
                let per = digits(&s[open + 1..close])?;
                if per.is_empty() {
                    return Err(err("period must be nonempty"));
                }
                SymbolCode::new(pre, per)
            }
        }
    }
}

/// Draws a code with `depth` fair-coin digits and a zero tail — the left
/// endpoint of a uniformly chosen depth-`depth` cylinder.
///
/// Deterministic in `seed`: digits come LSB-first from the successive 64-bit
/// words of a `ChaCha8` stream seeded with `seed_from_u64`. The result is
/// canonical, so trailing zero draws merge into the `(0)` tail.
pub fn random_code(depth: usize, seed: u64) -> Result<SymbolCode> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SymbolCode::new(random_digits(&mut rng, depth), vec![0])
}

/// Same digit-drawing scheme as [`random_code`], for callers that manage
/// their own stream (per-sample RNGs in Monte Carlo runs).
pub fn random_digits(rng: &mut impl RngCore, depth: usize) -> Vec<u8> {
    let mut digits = Vec::with_capacity(depth);
    let mut word = 0u64;
    for i in 0..depth {
        if i % 64 == 0 {
            word = rng.next_u64();
        }
        digits.push(((word >> (i % 64)) & 1) as u8);
    }
    digits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use proptest::prelude::*;

    fn code(s: &str) -> SymbolCode {
        s.parse().unwrap()
    }

    #[test]
    fn named_point_values() {
        assert_eq!(code("(0)").value(), rat(0, 1));
        assert_eq!(code("1(0)").value(), rat(2, 3));
        assert_eq!(code("01(0)").value(), rat(2, 9));
        assert_eq!(code("(1)").value(), rat(1, 1));
        assert_eq!(code("11(0)").value(), rat(8, 9));
        assert_eq!(code("001(0)").value(), rat(2, 27));
    }

    #[test]
    fn named_distances() {
        assert_eq!(code("10(0)").distance(&code("01(0)")), rat(4, 9));
        let x = code("011(01)");
        assert_eq!(x.distance(&x), rat(0, 1));
        assert_eq!(code("(0)").distance(&code("(1)")), rat(1, 1));
    }

    #[test]
    fn canonicalization_examples() {
        // zero-tail merge
        let c = SymbolCode::new(vec![1, 0], vec![0, 0]).unwrap();
        assert_eq!(c.preperiod(), &[1]);
        assert_eq!(c.period(), &[0]);
        // minimal period
        let c = SymbolCode::new(vec![], vec![1, 1]).unwrap();
        assert_eq!(c.preperiod(), &[] as &[u8]);
        assert_eq!(c.period(), &[1]);
        // all-ones tail merges into (1)
        let c = SymbolCode::new(vec![1, 1], vec![1]).unwrap();
        assert_eq!(c, SymbolCode::one());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["(0)", "(1)", "01(0)", "1(10)", "01(100)"] {
            let c = code(s);
            assert_eq!(c.to_string(), s);
        }
        // bare digits imply a zero tail; display is canonical
        assert_eq!(code("01").to_string(), "01(0)");
        assert_eq!(code("0110").to_string(), "011(0)");
    }

    #[test]
    fn parser_rejects_garbage() {
        for s in ["012", "", "2", "(", ")1", "()", "1(2)", "0 1"] {
            assert!(s.parse::<SymbolCode>().is_err(), "should reject {s:?}");
        }
    }

    #[test]
    fn random_code_is_deterministic() {
        let a = random_code(4, 12345).unwrap();
        let b = random_code(4, 12345).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_code(4, 12346).unwrap());
        assert!(random_code(0, 1).is_err());
    }

    #[test]
    fn random_code_shape() {
        // Seed chosen so the 4th drawn digit is 1; then nothing merges and the
        // preperiod keeps its full length.
        let mut seed = 0;
        let c = loop {
            let c = random_code(4, seed).unwrap();
            if c.preperiod().len() == 4 {
                break c;
            }
            seed += 1;
        };
        assert_eq!(c.period(), &[0]);
        assert_eq!(c.preperiod().len(), 4);
    }

    #[test]
    fn random_digit_mean_is_half() {
        // Law-of-large-numbers check on the digit stream itself.
        let depth = 16;
        let draws = 10_000;
        let mut ones = 0u64;
        for seed in 0..draws {
            let c = random_code(depth, seed).unwrap();
            for i in 0..depth {
                ones += c.digit(i) as u64;
            }
        }
        let mean = ones as f64 / (draws * depth as u64) as f64;
        assert!((mean - 0.5).abs() < 0.02, "digit mean {mean}");
    }

    #[test]
    fn prefix_agreement_bounds_distance() {
        // Codes agreeing on the first m digits are within 3^-m.
        let a = code("0110(01)");
        let b = code("0111(10)");
        let m = a.first_difference(&b).unwrap();
        assert_eq!(m, 3);
        let bound = BigRational::new(1.into(), pow3(m as u64));
        assert!(a.distance(&b) <= bound);
    }

    /// Independent series summation with interval bounds: sums the first
    /// `depth` terms of Σ 2(a_k − b_k)/3^k and brackets the tail by ±3^-depth.
    fn distance_by_truncated_series(a: &SymbolCode, b: &SymbolCode, depth: usize) -> (BigRational, BigRational) {
        let mut partial = BigRational::zero();
        for k in 0..depth {
            let diff = a.digit(k) as i64 - b.digit(k) as i64;
            partial += BigRational::new((2 * diff).into(), pow3(k as u64 + 1));
        }
        let tail = BigRational::new(1.into(), pow3(depth as u64));
        let abs = partial.abs();
        let lo = if abs > tail {
            abs.clone() - &tail
        } else {
            BigRational::zero()
        };
        (lo, abs + tail)
    }

    proptest! {
        #[test]
        fn distance_matches_series_oracle(
            pre_a in proptest::collection::vec(0u8..2, 0..8),
            per_a in proptest::collection::vec(0u8..2, 1..4),
            pre_b in proptest::collection::vec(0u8..2, 0..8),
            per_b in proptest::collection::vec(0u8..2, 1..4),
        ) {
            let a = SymbolCode::new(pre_a, per_a).unwrap();
            let b = SymbolCode::new(pre_b, per_b).unwrap();
            let d = a.distance(&b);
            let (lo, hi) = distance_by_truncated_series(&a, &b, 40);
            prop_assert!(d >= lo && d <= hi, "distance {d} outside [{lo}, {hi}]");
            // symmetry and zero-iff-equal
            prop_assert_eq!(&d, &b.distance(&a));
            prop_assert_eq!(d.is_zero(), a == b);
        }

        #[test]
        fn canonicalize_is_idempotent(
            pre in proptest::collection::vec(0u8..2, 0..10),
            per in proptest::collection::vec(0u8..2, 1..6),
        ) {
            let c = SymbolCode::new(pre, per).unwrap();
            let again = SymbolCode::new(c.preperiod().to_vec(), c.period().to_vec()).unwrap();
            prop_assert_eq!(c, again);
        }

        #[test]
        fn equal_codes_have_equal_sequences(
            pre in proptest::collection::vec(0u8..2, 0..10),
            per in proptest::collection::vec(0u8..2, 1..6),
            extra in 1usize..4,
        ) {
            // Unrolling the period into the preperiod must not change identity.
            let c = SymbolCode::new(pre.clone(), per.clone()).unwrap();
            let mut pre2 = pre;
            for i in 0..extra {
                pre2.push(per[i % per.len()]);
            }
            let mut per2 = per.clone();
            per2.rotate_left(extra % per.len());
            let d = SymbolCode::new(pre2, per2).unwrap();
            prop_assert_eq!(c, d);
        }
    }
}
