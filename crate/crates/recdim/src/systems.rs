//! The dynamical systems under study, behind one common interface.
//!
//! Three measure-preserving systems are provided:
//!
//! - **Cantor odometer** (adding machine): acts on binary codings by adding 1
//!   with carry in digit order — scan for the first `0`, set it to `1`, zero
//!   everything before it. A piecewise isometry of the Cantor set preserving
//!   the Cantor measure (mass `2^-m` per depth-`m` cylinder). Slowly mixing.
//! - **Circle rotation** `x ↦ x + θ mod 1`. Irrational angles are specified
//!   by their continued fraction, never by a float, so that orbit distances
//!   come with certified error bounds and record comparisons are provable.
//! - **Doubling map** `x ↦ 2x mod 1` on dyadic rationals: the rapidly mixing
//!   contrast system.
//!
//! All operations are pure functions over immutable values.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::numeric::{parse_rational, Distance};
use crate::symbolic::{random_digits, SymbolCode};
use crate::{Error, Result};

/// Which dynamical system, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Odometer,
    Rotation(Angle),
    Doubling,
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            System::Odometer => write!(f, "odometer"),
            System::Rotation(Angle::Rational(r)) => write!(f, "rotation:frac={r}"),
            System::Rotation(a) => write!(f, "rotation:cf={a}"),
            System::Doubling => write!(f, "doubling"),
        }
    }
}

impl FromStr for System {
    type Err = Error;

    /// Accepts `"odometer"`, `"doubling"`, `"rotation:frac=p/q"`, and
    /// `"rotation:cf=[a0;a1,a2,...]"` (see [`Angle`] for the CF syntax).
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "odometer" => Ok(System::Odometer),
            "doubling" => Ok(System::Doubling),
            other => {
                if let Some(spec) = other.strip_prefix("rotation:") {
                    if let Some(frac) = spec.strip_prefix("frac=") {
                        let r = parse_rational(frac)?;
                        Ok(System::Rotation(Angle::Rational(r)))
                    } else if let Some(cf) = spec.strip_prefix("cf=") {
                        Ok(System::Rotation(cf.parse()?))
                    } else {
                        Err(Error::Parse(format!(
                            "invalid rotation spec '{other}': expected rotation:frac=p/q or rotation:cf=[...]"
                        )))
                    }
                } else {
                    Err(Error::Parse(format!("unknown system '{other}'")))
                }
            }
        }
    }
}

/// A rotation angle: an exact rational, or a (quadratic) irrational given by
/// its eventually periodic continued fraction expansion.
#[derive(Debug, Clone, PartialEq)]
pub enum Angle {
    Rational(BigRational),
    /// `[h0; h1, h2, …, (c1, …, cm)]` with the parenthesized block repeating
    /// forever. All partial quotients after the first must be ≥ 1.
    Cf { head: Vec<u64>, cycle: Vec<u64> },
}

impl Angle {
    pub fn cf(head: Vec<u64>, cycle: Vec<u64>) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::InvalidArgument("continued fraction needs a leading term".into()));
        }
        if cycle.is_empty() {
            return Err(Error::InvalidArgument(
                "periodic continued fraction needs a nonempty cycle (use a rational otherwise)".into(),
            ));
        }
        if head[1..].iter().chain(cycle.iter()).any(|&a| a == 0) {
            return Err(Error::InvalidArgument(
                "partial quotients after the first must be >= 1".into(),
            ));
        }
        Ok(Angle::Cf { head, cycle })
    }

    /// The golden mean `(√5 − 1)/2 = [0; 1, 1, 1, …]`.
    pub fn golden() -> Self {
        Angle::Cf {
            head: vec![0],
            cycle: vec![1],
        }
    }

    /// `√2 − 1 = [0; 2, 2, 2, …]`.
    pub fn pell() -> Self {
        Angle::Cf {
            head: vec![0],
            cycle: vec![2],
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Angle::Rational(_))
    }

    /// Partial quotient `a_k` (only for the CF variant).
    fn term(head: &[u64], cycle: &[u64], k: usize) -> u64 {
        if k < head.len() {
            head[k]
        } else {
            cycle[(k - head.len()) % cycle.len()]
        }
    }

    /// A two-sided rational enclosure of the angle with denominator of at
    /// least `min_denom_bits` bits (CF variant), or the exact value
    /// (rational variant). The enclosure width is exactly `1/denom`.
    pub fn theta_approx(&self, min_denom_bits: u64) -> ThetaApprox {
        match self {
            Angle::Rational(r) => {
                let den = r.denom().magnitude().clone();
                let num_floor = r.numer().mod_floor(r.denom()).magnitude().clone();
                ThetaApprox {
                    denom: den,
                    num: num_floor,
                    exact: true,
                }
            }
            Angle::Cf { head, cycle } => {
                // Consecutive convergents p_{k-1}/q_{k-1}, p_k/q_k bracket θ
                // with |p_{k-1} q_k − p_k q_{k-1}| = 1, so the enclosure over
                // the common denominator q_{k-1} q_k has width exactly one.
                let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
                let (mut p_cur, mut q_cur) = (BigUint::from(head[0]), BigUint::one());
                let mut k = 1usize;
                loop {
                    let a = Self::term(head, cycle, k);
                    let p_next = &p_cur * a + &p_prev;
                    let q_next = &q_cur * a + &q_prev;
                    p_prev = std::mem::replace(&mut p_cur, p_next);
                    q_prev = std::mem::replace(&mut q_cur, q_next);
                    k += 1;
                    if k >= 3 && (q_prev.bits() + q_cur.bits()) > min_denom_bits {
                        break;
                    }
                }
                let denom = &q_prev * &q_cur;
                let lo = (&p_prev * &q_cur).min(&p_cur * &q_prev);
                ThetaApprox {
                    num: lo % &denom,
                    denom,
                    exact: false,
                }
            }
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Rational(r) => write!(f, "{r}"),
            Angle::Cf { head, cycle } => {
                write!(f, "[{}", head[0])?;
                let mut sep = ';';
                for h in &head[1..] {
                    write!(f, "{sep}{h}")?;
                    sep = ',';
                }
                write!(f, "{sep}(")?;
                for (i, c) in cycle.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")]")
            }
        }
    }
}

impl FromStr for Angle {
    type Err = Error;

    /// Parses `[a0;a1,a2,...]` forms:
    ///
    /// - `[0;(1)]` — parenthesized periodic tail
    /// - `[0;1,1,...]` — trailing `...` repeats the last listed term forever
    /// - `[0;2,3]` — finite expansion, i.e. an exact rational
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let err = |msg: &str| Error::Parse(format!("invalid continued fraction '{s}': {msg}"));
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| err("expected [a0;a1,...]"))?;
        let (a0_str, rest) = match inner.split_once(';') {
            Some(parts) => parts,
            None => (inner, ""),
        };
        let a0: u64 = a0_str
            .trim()
            .parse()
            .map_err(|_| err("leading term must be a nonnegative integer"))?;
        let mut head = vec![a0];
        let mut cycle: Vec<u64> = Vec::new();
        let rest = rest.trim();
        if !rest.is_empty() {
            let (head_part, tail) = match rest.find('(') {
                Some(open) => {
                    let close = rest.strip_suffix(')').ok_or_else(|| err("unbalanced parentheses"))?;
                    let cycle_str = &close[open + 1..];
                    for t in cycle_str.split(',') {
                        cycle.push(t.trim().parse().map_err(|_| err("bad cycle term"))?);
                    }
                    (&rest[..open], false)
                }
                None => match rest.strip_suffix("...") {
                    Some(prefix) => (prefix, true),
                    None => (rest, false),
                },
            };
            let mut terms: Vec<u64> = Vec::new();
            for t in head_part.split(',') {
                let t = t.trim();
                if t.is_empty() {
                    continue;
                }
                terms.push(t.parse().map_err(|_| err("bad term"))?);
            }
            if tail {
                let last = *terms.last().ok_or_else(|| err("'...' needs a preceding term"))?;
                cycle = vec![last];
            }
            head.extend(terms);
        }
        if cycle.is_empty() {
            // Finite expansion: evaluate to an exact rational, back to front.
            if head[1..].iter().any(|&a| a == 0) {
                return Err(err("partial quotients after the first must be >= 1"));
            }
            let mut value = BigRational::from_integer(BigInt::from(*head.last().unwrap()));
            for &a in head.iter().rev().skip(1) {
                value = BigRational::from_integer(BigInt::from(a)) + value.recip();
            }
            Ok(Angle::Rational(value))
        } else {
            Angle::cf(head, cycle)
        }
    }
}

/// A rational enclosure `θ ∈ [num/denom, (num+1)/denom]` of a rotation angle
/// (for `exact`, `θ = num/denom` exactly), already reduced mod 1.
#[derive(Debug, Clone)]
pub struct ThetaApprox {
    pub denom: BigUint,
    pub num: BigUint,
    pub exact: bool,
}

impl ThetaApprox {
    /// Certified enclosure of the circle distance `‖n·θ‖`.
    pub fn circle_distance(&self, n: u64) -> (BigRational, BigRational) {
        let d = &self.denom;
        let r = (&self.num * n) % d;
        if self.exact {
            let dist = r.clone().min(d - &r);
            let v = BigRational::new(BigInt::from(dist), BigInt::from(d.clone()));
            return (v.clone(), v);
        }
        circle_fold(&r, n, d)
    }
}

/// Image of the interval `[r, r+w] mod d` (positions scaled by `d`) under the
/// circle distance `x ↦ min(x, d−x)/d`, returned as integer numerators over
/// the common denominator `2d`.
pub(crate) fn circle_fold_scaled(r: &BigUint, w: u64, d: &BigUint) -> (BigUint, BigUint) {
    if BigUint::from(w) >= *d {
        return (BigUint::zero(), d.clone());
    }
    let b = r + w;
    if b >= *d {
        // wraps through 0: distances reach down to 0
        let hi = (d - r).max(&b - d);
        return (BigUint::zero(), hi << 1);
    }
    let two_r = r << 1;
    let two_b = &b << 1;
    let two_d = d << 1;
    if two_b <= *d {
        (two_r, two_b)
    } else if two_r >= *d {
        (&two_d - &two_b, &two_d - &two_r)
    } else {
        // straddles the peak at d/2
        (two_r.min(&two_d - &two_b), d.clone())
    }
}

/// [`circle_fold_scaled`] as a rational enclosure.
fn circle_fold(r: &BigUint, w: u64, d: &BigUint) -> (BigRational, BigRational) {
    let (lo, hi) = circle_fold_scaled(r, w, d);
    let two_d = BigInt::from(d << 1);
    (
        BigRational::new(BigInt::from(lo), two_d.clone()),
        BigRational::new(BigInt::from(hi), two_d),
    )
}

/// One application of the adding machine: find the first digit equal to 0,
/// set it to 1, zero all earlier digits. The all-ones code maps to all zeros.
pub fn odometer_step(code: &SymbolCode) -> SymbolCode {
    if *code == SymbolCode::one() {
        return SymbolCode::zero();
    }
    let p = code.preperiod().len();
    let q = code.period().len();
    // A canonical code other than (1) has a 0 within the preperiod plus one
    // full period.
    let j = (0..p + q)
        .find(|&i| code.digit(i) == 0)
        .expect("non-all-ones code has a zero digit");
    let mut pre = vec![0u8; j];
    pre.push(1);
    if j < p {
        pre.extend_from_slice(&code.preperiod()[j + 1..]);
        SymbolCode::new(pre, code.period().to_vec()).unwrap()
    } else {
        // The tail after position j continues the period at phase j+1.
        let mut per = code.period().to_vec();
        per.rotate_left((j + 1 - p) % q);
        SymbolCode::new(pre, per).unwrap()
    }
}

/// `n`-fold application of the adding machine in one pass.
///
/// A coded sequence, read LSB-first, is the 2-adic expansion of a rational
/// with odd denominator; the odometer is `+1` in that arithmetic. Adding `n`
/// to the 2-adic value and re-expanding costs `O(log n + code length)`
/// instead of `n` steps, which is what makes horizons like `2^30` reachable.
pub fn odometer_power(code: &SymbolCode, n: u64) -> SymbolCode {
    let (a, b) = two_adic_value(code);
    let shifted = a + BigInt::from(n) * &b;
    let (pre, per) = two_adic_digits(shifted, &b);
    SymbolCode::new(pre, per).unwrap()
}

/// The 2-adic value of a code as a fraction `a/b` with `b` odd and positive:
/// `Σ d_i 2^i = A + 2^p · E/(1 − 2^q) = (A(2^q − 1) − 2^p E) / (2^q − 1)`.
fn two_adic_value(code: &SymbolCode) -> (BigInt, BigInt) {
    let p = code.preperiod().len() as u64;
    let q = code.period().len() as u64;
    let mut a_val = BigInt::zero();
    for (i, &d) in code.preperiod().iter().enumerate() {
        if d == 1 {
            a_val += BigInt::one() << i;
        }
    }
    let mut e_val = BigInt::zero();
    for (i, &d) in code.period().iter().enumerate() {
        if d == 1 {
            e_val += BigInt::one() << i;
        }
    }
    let b = (BigInt::one() << q) - 1;
    let a = a_val * &b - (e_val << p);
    (a, b)
}

/// 2-adic digit expansion of `a/b` (`b` odd, positive) as (preperiod, period),
/// found by extracting digits until the state repeats.
fn two_adic_digits(mut a: BigInt, b: &BigInt) -> (Vec<u8>, Vec<u8>) {
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut digits: Vec<u8> = Vec::new();
    loop {
        if let Some(&start) = seen.get(&a) {
            let per = digits.split_off(start);
            return (digits, per);
        }
        seen.insert(a.clone(), digits.len());
        let d = if a.is_odd() { 1u8 } else { 0u8 };
        digits.push(d);
        if d == 1 {
            a -= b;
        }
        a /= 2;
    }
}

/// Certified distance `‖nθ‖` of the n-th rotation iterate from its starting
/// point (independent of that starting point).
///
/// Rational angles give an exact value — in particular exact 0 whenever the
/// reduced denominator divides `n`. Continued-fraction angles give a
/// certified interval, refined until its relative width is below `2^-30`.
pub fn rotation_orbit_distance(angle: &Angle, n: u64) -> Result<Distance> {
    rotation_orbit_distance_with(angle, n, 30)
}

/// [`rotation_orbit_distance`] with a caller-chosen relative width `2^-rel_bits`.
pub fn rotation_orbit_distance_with(angle: &Angle, n: u64, rel_bits: u32) -> Result<Distance> {
    if n == 0 {
        return Err(Error::InvalidArgument("iterate index must be >= 1".into()));
    }
    match angle {
        Angle::Rational(_) => {
            let ta = angle.theta_approx(0);
            let (lo, _) = ta.circle_distance(n);
            Ok(Distance::Exact(lo))
        }
        Angle::Cf { .. } => {
            let mut bits = 64 + 2 * (64 - n.leading_zeros() as u64) + rel_bits as u64;
            for _ in 0..64 {
                let ta = angle.theta_approx(bits);
                let (lo, hi) = ta.circle_distance(n);
                if !lo.is_zero() {
                    let width = &hi - &lo;
                    if width * (BigInt::one() << rel_bits) <= lo {
                        return Ok(Distance::certified(lo, hi));
                    }
                }
                bits *= 2;
            }
            Err(Error::PrecisionFailure {
                n,
                detail: "rotation distance did not certify at the precision cap".into(),
            })
        }
    }
}

/// Distance of the real interval `[lo, hi]` to the nearest integer, as an
/// interval; `None` when the input is a full period wide.
pub(crate) fn circle_distance_interval_rational(
    lo: &BigRational,
    hi: &BigRational,
) -> Option<(BigRational, BigRational)> {
    let one = BigRational::one();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if hi - lo >= one {
        return None;
    }
    let base = lo.floor();
    let a = lo - &base;
    let b = hi - &base;
    if b >= one {
        // wraps an integer: distance dips to zero
        let hi_d = (&one - &a).max(&b - &one);
        return Some((BigRational::zero(), hi_d));
    }
    if b <= half {
        Some((a, b))
    } else if a >= half {
        Some((&one - &b, &one - &a))
    } else {
        Some((a.min(&one - &b), half))
    }
}

/// One application of the doubling map to an exact dyadic rational in `[0,1)`.
pub fn doubling_step(x: &BigRational) -> Result<BigRational> {
    validate_dyadic(x)?;
    let two_x = x * BigRational::from_integer(BigInt::from(2));
    if two_x < BigRational::one() {
        Ok(two_x)
    } else {
        Ok(two_x - BigRational::one())
    }
}

fn validate_dyadic(x: &BigRational) -> Result<()> {
    if x.is_negative() || *x >= BigRational::one() {
        return Err(Error::InvalidArgument(format!("point {x} outside [0, 1)")));
    }
    if x.denom().magnitude().count_ones() != 1 {
        return Err(Error::InvalidArgument(format!(
            "point {x} is not dyadic (denominator must be a power of 2)"
        )));
    }
    Ok(())
}

/// A cylinder (odometer) or arc (rotation / doubling) with positive measure.
#[derive(Debug, Clone, PartialEq)]
pub enum CylinderSpec {
    /// Points whose coding starts with this word; the empty word is the full space.
    Prefix(Vec<u8>),
    /// The arc `[a, b)` with `0 ≤ a` and `a < b ≤ a + 1`.
    Arc { a: BigRational, b: BigRational },
}

/// Measure of a cylinder or arc: the Cantor measure gives each depth-`m`
/// cylinder mass `2^-m`; rotation and doubling preserve Lebesgue measure, so
/// an arc gets its length.
pub fn cylinder_measure(system: &System, spec: &CylinderSpec) -> Result<BigRational> {
    match (system, spec) {
        (System::Odometer, CylinderSpec::Prefix(w)) => {
            if w.iter().any(|&d| d > 1) {
                return Err(Error::InvalidArgument("cylinder digits must be 0 or 1".into()));
            }
            Ok(BigRational::new(
                BigInt::one(),
                BigInt::one() << w.len(),
            ))
        }
        (System::Rotation(_) | System::Doubling, CylinderSpec::Arc { a, b }) => {
            let len = b - a;
            if !len.is_positive() {
                return Err(Error::InvalidArgument("empty arc".into()));
            }
            if len > BigRational::one() {
                return Err(Error::InvalidArgument("arc longer than the circle".into()));
            }
            Ok(len)
        }
        _ => Err(Error::InvalidArgument(
            "cylinder spec does not match the system kind".into(),
        )),
    }
}

/// A point of one of the three systems.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    /// Odometer: a coded Cantor-set point.
    Code(SymbolCode),
    /// Rotation: an exact circle coordinate in `[0, 1)`.
    Circle(BigRational),
    /// Doubling: the dyadic rational `num / 2^depth` in `[0, 1)`.
    Dyadic { num: BigUint, depth: u64 },
}

impl Point {
    pub fn dyadic_from_rational(x: &BigRational) -> Result<Point> {
        validate_dyadic(x)?;
        let depth = x.denom().magnitude().bits() - 1;
        Ok(Point::Dyadic {
            num: x.numer().magnitude().clone(),
            depth,
        })
    }

    /// Doubling-map point from explicit binary digits, `bits[i]` carrying
    /// weight `2^-(i+1)`.
    pub fn dyadic_from_bits(bits: &[u8]) -> Point {
        let mut num = BigUint::zero();
        for &b in bits {
            num = (num << 1) + b;
        }
        Point::Dyadic {
            num,
            depth: bits.len() as u64,
        }
    }

    pub fn dyadic_value(&self) -> Option<BigRational> {
        match self {
            Point::Dyadic { num, depth } => Some(BigRational::new(
                BigInt::from(num.clone()),
                BigInt::one() << *depth,
            )),
            _ => None,
        }
    }

    /// Bit `i` (0-based, weight `2^-(i+1)`) of a dyadic point.
    pub fn dyadic_bit(num: &BigUint, depth: u64, i: u64) -> u8 {
        if i >= depth {
            0
        } else {
            num.bit(depth - 1 - i) as u8
        }
    }

    /// Draws a μ-random point for the system: a depth-`depth` fair-digit code
    /// (odometer), a depth-bit dyadic (doubling), or a 64-bit dyadic circle
    /// coordinate (rotation). Deterministic in `seed` via `ChaCha8`.
    pub fn random_for(system: &System, depth: usize, seed: u64) -> Result<Point> {
        Point::random_for_indexed(system, depth, seed, 0)
    }

    /// [`Point::random_for`] on the ChaCha stream `index`: independent points
    /// per sample index under one master seed, so samples can be drawn
    /// concurrently and merged by index.
    pub fn random_for_indexed(system: &System, depth: usize, seed: u64, index: u64) -> Result<Point> {
        if depth == 0 {
            return Err(Error::InvalidArgument("depth must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        match system {
            System::Odometer => Ok(Point::Code(SymbolCode::new(
                random_digits(&mut rng, depth),
                vec![0],
            )?)),
            System::Doubling => Ok(Point::dyadic_from_bits(&random_digits(&mut rng, depth))),
            System::Rotation(_) => {
                let num = rng.next_u64() >> 1;
                Ok(Point::Circle(BigRational::new(
                    BigInt::from(num),
                    BigInt::one() << 63,
                )))
            }
        }
    }

    pub fn validate_for(&self, system: &System) -> Result<()> {
        match (system, self) {
            (System::Odometer, Point::Code(_)) => Ok(()),
            (System::Rotation(_), Point::Circle(x)) => {
                if x.is_negative() || *x >= BigRational::one() {
                    Err(Error::InvalidArgument(format!("circle point {x} outside [0, 1)")))
                } else {
                    Ok(())
                }
            }
            (System::Doubling, Point::Dyadic { num, depth }) => {
                if num.bits() > *depth {
                    Err(Error::InvalidArgument("dyadic numerator exceeds depth".into()))
                } else {
                    Ok(())
                }
            }
            _ => Err(Error::InvalidArgument(
                "point variant does not match the system kind".into(),
            )),
        }
    }

    /// Short human-readable label for reports; deep dyadics are abbreviated.
    pub fn label(&self) -> String {
        match self {
            Point::Code(c) => c.to_string(),
            Point::Circle(x) => x.to_string(),
            Point::Dyadic { num, depth } => {
                if *depth <= 64 {
                    format!("{num}/2^{depth}")
                } else {
                    let head: String = (0..32)
                        .map(|i| char::from(b'0' + Point::dyadic_bit(num, *depth, i)))
                        .collect();
                    format!("dyadic:0.{head}...[{depth} bits]")
                }
            }
        }
    }
}

/// Parses a point spec for a system: a code string (odometer), an exact
/// rational (rotation / doubling), or `random:depth=D[,seed=S]` for a
/// μ-random point (with `default_seed` when no seed is given).
pub fn parse_point(system: &System, s: &str, default_seed: u64) -> Result<Point> {
    let s = s.trim();
    if let Some(spec) = s.strip_prefix("random:") {
        let mut depth: Option<usize> = None;
        let mut seed = default_seed;
        for part in spec.split(',') {
            if let Some(v) = part.strip_prefix("depth=") {
                depth = Some(v.parse().map_err(|_| Error::Parse(format!("bad depth in '{s}'")))?);
            } else if let Some(v) = part.strip_prefix("seed=") {
                seed = v.parse().map_err(|_| Error::Parse(format!("bad seed in '{s}'")))?;
            } else {
                return Err(Error::Parse(format!("unknown random-point field '{part}'")));
            }
        }
        let depth = depth.ok_or_else(|| Error::Parse(format!("random point '{s}' needs depth=D")))?;
        return Point::random_for(system, depth, seed);
    }
    match system {
        System::Odometer => Ok(Point::Code(s.parse()?)),
        System::Rotation(_) => {
            let x = parse_rational(s)?;
            let p = Point::Circle(x);
            p.validate_for(system)?;
            Ok(p)
        }
        System::Doubling => Point::dyadic_from_rational(&parse_rational(s)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    fn code(s: &str) -> SymbolCode {
        s.parse().unwrap()
    }

    #[test]
    fn orbit_of_zero_matches_named_points() {
        let z0 = SymbolCode::zero();
        let z1 = odometer_step(&z0);
        assert_eq!(z1.value(), rat(2, 3));
        let z2 = odometer_step(&z1);
        assert_eq!(z2.value(), rat(2, 9));
        let z3 = odometer_step(&z2);
        assert_eq!(z3.value(), rat(8, 9));
        let z4 = odometer_step(&z3);
        assert_eq!(z4.value(), rat(2, 27));
    }

    #[test]
    fn step_examples() {
        assert_eq!(odometer_step(&code("(0)")), code("1(0)"));
        assert_eq!(odometer_step(&code("11(0)")), code("001(0)"));
        assert_eq!(odometer_step(&code("(1)")), code("(0)"));
        // carry into a periodic tail: 1,1,0,1,0,… + 1 = 0,0,1,1,0,…
        assert_eq!(odometer_step(&code("1(10)")), code("001(10)"));
    }

    #[test]
    fn power_named_values() {
        let z0 = SymbolCode::zero();
        assert_eq!(odometer_power(&z0, 2).value(), rat(2, 9));
        assert_eq!(odometer_power(&z0, 3).value(), rat(8, 9));
        assert_eq!(odometer_power(&z0, 0), z0);
        let c = code("011(010)");
        assert_eq!(odometer_power(&c, 0), c);
    }

    #[test]
    fn power_equals_iterated_step_exhaustively() {
        // all preperiod words of depth <= 7 (zero tail), n <= 2^7
        for depth in 0..=7usize {
            for w in 0..(1u32 << depth) {
                let pre: Vec<u8> = (0..depth).map(|i| ((w >> i) & 1) as u8).collect();
                let c = SymbolCode::new(pre, vec![0]).unwrap();
                let mut stepped = c.clone();
                for n in 1..=(1u64 << 7) {
                    stepped = odometer_step(&stepped);
                    assert_eq!(odometer_power(&c, n), stepped, "code {c} at n = {n}");
                }
            }
        }
    }

    #[test]
    fn power_equals_iterated_step_with_periods() {
        for (pre, per) in [
            (vec![], vec![1]),
            (vec![0], vec![1]),
            (vec![1, 0], vec![1, 1, 0]),
            (vec![0, 1, 1], vec![0, 1]),
        ] {
            let c = SymbolCode::new(pre, per).unwrap();
            let mut stepped = c.clone();
            for n in 1..=64u64 {
                stepped = odometer_step(&stepped);
                assert_eq!(odometer_power(&c, n), stepped, "code {c} at n = {n}");
            }
        }
    }

    #[test]
    fn step_preserves_cylinder_measure() {
        // For every depth-m cylinder word w, the preimage of cylinder(w)
        // under one step is the single depth-m cylinder of w - 1 mod 2^m:
        // the first m digits of x + 1 depend only on the first m digits of x.
        for m in 1..=12usize {
            let modulus = 1u64 << m;
            for w in 0..modulus {
                let pre: Vec<u8> = (0..m).map(|i| ((w >> i) & 1) as u8).collect();
                let c = SymbolCode::new(pre, vec![0]).unwrap();
                let stepped = odometer_step(&c);
                let expect = (w + 1) % modulus;
                for i in 0..m {
                    assert_eq!(stepped.digit(i) as u64, (expect >> i) & 1);
                }
            }
        }
    }

    #[test]
    fn rotation_distance_rational() {
        let half = Angle::Rational(rat(1, 2));
        assert_eq!(rotation_orbit_distance(&half, 2).unwrap(), Distance::Exact(rat(0, 1)));
        assert_eq!(rotation_orbit_distance(&half, 1).unwrap(), Distance::Exact(rat(1, 2)));
        let third = Angle::Rational(rat(1, 3));
        assert_eq!(rotation_orbit_distance(&third, 2).unwrap(), Distance::Exact(rat(1, 3)));
        assert!(rotation_orbit_distance(&third, 1).is_ok());
        assert!(rotation_orbit_distance(&third, 0).is_err());
    }

    #[test]
    fn rotation_distance_golden() {
        // ||θ|| = 1 - θ = (3 - √5)/2 ≈ 0.3819660
        let d = rotation_orbit_distance(&Angle::golden(), 1).unwrap();
        assert!((d.to_f64() - 0.3819660112501051).abs() < 1e-12);
        assert!(d.error_bound() < 1e-9);
        // base-point independence realized as agreement across precisions
        let ta1 = Angle::golden().theta_approx(80);
        let ta2 = Angle::golden().theta_approx(400);
        for n in [1u64, 2, 3, 5, 8, 13, 100, 9999] {
            let (lo1, hi1) = ta1.circle_distance(n);
            let (lo2, hi2) = ta2.circle_distance(n);
            assert!(lo1 <= hi2 && lo2 <= hi1, "inconsistent enclosures at n={n}");
        }
    }

    #[test]
    fn doubling_examples() {
        assert_eq!(doubling_step(&rat(0, 1)).unwrap(), rat(0, 1));
        assert_eq!(doubling_step(&rat(3, 8)).unwrap(), rat(3, 4));
        assert_eq!(doubling_step(&rat(3, 4)).unwrap(), rat(1, 2));
        assert!(doubling_step(&rat(1, 3)).is_err());
        assert!(doubling_step(&rat(5, 4)).is_err());
    }

    #[test]
    fn cylinder_measures() {
        let m = cylinder_measure(&System::Odometer, &CylinderSpec::Prefix(vec![0, 1])).unwrap();
        assert_eq!(m, rat(1, 4));
        let full = cylinder_measure(&System::Odometer, &CylinderSpec::Prefix(vec![])).unwrap();
        assert_eq!(full, rat(1, 1));
        let arc = cylinder_measure(
            &System::Doubling,
            &CylinderSpec::Arc { a: rat(0, 1), b: rat(1, 3) },
        )
        .unwrap();
        assert_eq!(arc, rat(1, 3));
        assert!(cylinder_measure(
            &System::Doubling,
            &CylinderSpec::Arc { a: rat(1, 3), b: rat(1, 3) },
        )
        .is_err());
        assert!(cylinder_measure(&System::Doubling, &CylinderSpec::Prefix(vec![0])).is_err());
    }

    #[test]
    fn system_spec_round_trip() {
        for s in ["odometer", "doubling", "rotation:frac=1/2", "rotation:cf=[0;(1)]"] {
            let sys: System = s.parse().unwrap();
            assert_eq!(sys.to_string(), s);
        }
        // '...' repeats the last listed term forever
        assert_eq!(
            "rotation:cf=[0;1,1,...]".parse::<System>().unwrap(),
            System::Rotation(Angle::Cf { head: vec![0, 1, 1], cycle: vec![1] })
        );
        // finite continued fraction collapses to a rational: [0;2,2] = 2/5
        assert_eq!(
            "rotation:cf=[0;2,2]".parse::<System>().unwrap(),
            System::Rotation(Angle::Rational(rat(2, 5)))
        );
        assert!("spinning".parse::<System>().is_err());
        assert!("rotation:deg=90".parse::<System>().is_err());
    }

    #[test]
    fn point_parsing() {
        let odo = System::Odometer;
        assert_eq!(parse_point(&odo, "(0)", 0).unwrap(), Point::Code(SymbolCode::zero()));
        let doubling = System::Doubling;
        let p = parse_point(&doubling, "3/8", 0).unwrap();
        assert_eq!(p.dyadic_value().unwrap(), rat(3, 8));
        assert!(parse_point(&doubling, "1/3", 0).is_err());
        let rot = System::Rotation(Angle::golden());
        assert_eq!(parse_point(&rot, "0.25", 0).unwrap(), Point::Circle(rat(1, 4)));
        assert!(parse_point(&rot, "3/2", 0).is_err());
        // random points are deterministic in the seed
        let a = parse_point(&odo, "random:depth=8,seed=7", 0).unwrap();
        let b = parse_point(&odo, "random:depth=8,seed=7", 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dyadic_bits_round_trip() {
        let p = Point::dyadic_from_bits(&[1, 0, 1]);
        assert_eq!(p.dyadic_value().unwrap(), rat(5, 8));
        if let Point::Dyadic { num, depth } = &p {
            assert_eq!(Point::dyadic_bit(num, *depth, 0), 1);
            assert_eq!(Point::dyadic_bit(num, *depth, 1), 0);
            assert_eq!(Point::dyadic_bit(num, *depth, 2), 1);
            assert_eq!(Point::dyadic_bit(num, *depth, 3), 0);
        }
    }
}
