//! Closest-return records and the recurrence exponents derived from them.
//!
//! A *closest return* (record) of an orbit is an iterate `n` whose distance
//! `d(Tⁿx, x)` is strictly smaller than at every earlier iterate. The record
//! sequence `(n_k, d_k)` is all that matters for `liminf n^{1/α} d(Tⁿx, x)`:
//! any non-record time `n` has `d(Tⁿx, x) ≥ d_k` for the last record before
//! it, so its scaled term `n^{1/α} d` is dominated by `n_k^{1/α} d_k`.
//!
//! [`scan_records`] examines every iterate up to the horizon and keeps the
//! comparisons honest: exact rational arithmetic where possible (odometer,
//! doubling, rational rotations) and certified interval arithmetic refined
//! until every record decision is provable (irrational rotations). The
//! derived quantities — the finite-horizon liminf proxy, the recurrence
//! exponents, and the dimension lower bound — live here too.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::str::FromStr;

use crate::numeric::{ln_rational, to_f64, Alpha, Distance};
use crate::symbolic::SymbolCode;
use crate::systems::{circle_fold_scaled, odometer_power, odometer_step, Angle, Point, System};
use crate::{Error, Result};

/// Default number of leading records discarded before tail statistics.
pub const DEFAULT_TAIL_START: usize = 5;

/// One closest return: iterate index and its distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnRecord {
    pub n: u64,
    pub distance: Distance,
}

/// The complete closest-return sequence of one orbit up to a horizon.
///
/// Within a profile the `n` are strictly increasing and the distances
/// strictly decreasing; a zero distance (periodic point) terminates the scan
/// and sets `periodic`.
#[derive(Debug, Clone)]
pub struct RecurrenceProfile {
    pub system: System,
    pub point: Point,
    pub horizon: u64,
    pub records: Vec<ReturnRecord>,
    pub periodic: bool,
}

/// Scans `n = 1..=horizon` and returns every closest return of the orbit of
/// `point`. Distances are compared exactly (odometer, doubling, rational
/// rotation) or with certified error bounds refined until every comparison
/// is provable (irrational rotation); an uncertifiable comparison at the
/// precision cap is a [`Error::PrecisionFailure`].
pub fn scan_records(system: &System, point: &Point, horizon: u64) -> Result<RecurrenceProfile> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    point.validate_for(system)?;
    let (records, periodic) = match (system, point) {
        (System::Odometer, Point::Code(code)) => scan_odometer(code, horizon),
        (System::Rotation(angle), Point::Circle(_)) => scan_rotation(angle, horizon)?,
        (System::Doubling, Point::Dyadic { num, depth }) => scan_doubling(num, *depth, horizon),
        _ => unreachable!("validated above"),
    };
    Ok(RecurrenceProfile {
        system: system.clone(),
        point: point.clone(),
        horizon,
        records,
        periodic,
    })
}

/// Odometer record scan by incremental stepping.
///
/// The only per-iterate work in the common case is locating the first digit
/// where `Tⁿx` differs from `x`: a first difference at (1-based) position `m`
/// forces `d ≥ 3^-m`, so iterates with `3^-m ≥ d_min` are dismissed without
/// touching big-rational arithmetic.
fn scan_odometer(x0: &SymbolCode, horizon: u64) -> (Vec<ReturnRecord>, bool) {
    let val0 = x0.value();
    let mut current = x0.clone();
    let mut records: Vec<ReturnRecord> = Vec::new();
    let mut d_min: Option<BigRational> = None;
    // dismiss iterates whose first difference position m has 3^-m >= d_min,
    // i.e. m <= m_star
    let mut m_star: usize = 0;
    for n in 1..=horizon {
        current = odometer_step(&current);
        let i0 = (0..)
            .find(|&i| current.digit(i) != x0.digit(i))
            .expect("odometer orbits never return exactly");
        if d_min.is_some() && i0 + 1 <= m_star {
            continue;
        }
        let d = (current.value() - &val0).abs();
        if d_min.as_ref().is_none_or(|dm| d < *dm) {
            m_star = log3_floor_of_reciprocal(&d);
            d_min = Some(d.clone());
            records.push(ReturnRecord {
                n,
                distance: Distance::Exact(d),
            });
        }
    }
    (records, false)
}

/// Largest `m >= 0` with `3^-m >= d`, for positive `d <= 1`.
fn log3_floor_of_reciprocal(d: &BigRational) -> usize {
    let num = d.numer().magnitude();
    let den = d.denom().magnitude();
    let mut t = num * 3u32;
    let mut m = 0usize;
    while t <= *den {
        t *= 3u32;
        m += 1;
    }
    m
}

/// Deep odometer probe along `n = 2^k` only, using the one-pass [`odometer_power`].
///
/// For the adding machine the closest returns happen at powers of two (adding
/// `2^k` leaves the first `k` digits alone, while any `2^k < n < 2^{k+1}`
/// disturbs an earlier digit), so probing dyadic times reaches horizons like
/// `2^30` that incremental scanning cannot. The full scanner remains the
/// ground truth; this probe is validated against it.
pub fn scan_odometer_dyadic(x0: &SymbolCode, max_exponent: u32) -> Vec<ReturnRecord> {
    let val0 = x0.value();
    let mut records: Vec<ReturnRecord> = Vec::new();
    let mut d_min: Option<BigRational> = None;
    for k in 0..=max_exponent {
        let n = 1u64 << k;
        let d = (odometer_power(x0, n).value() - &val0).abs();
        if d_min.as_ref().is_none_or(|dm| d < *dm) {
            d_min = Some(d.clone());
            records.push(ReturnRecord {
                n,
                distance: Distance::Exact(d),
            });
        }
    }
    records
}

fn scan_rotation(angle: &Angle, horizon: u64) -> Result<(Vec<ReturnRecord>, bool)> {
    match angle {
        Angle::Rational(_) => Ok(scan_rotation_exact(angle, horizon)),
        Angle::Cf { .. } => {
            let mut bits = 80 + 2 * (64 - horizon.leading_zeros() as u64);
            let mut last_ambiguous = 0u64;
            for _ in 0..10 {
                let ta = angle.theta_approx(bits);
                match scan_rotation_certified(&ta.num, &ta.denom, horizon) {
                    Ok(records) => return Ok((records, false)),
                    Err(n) => {
                        last_ambiguous = n;
                        bits *= 2;
                    }
                }
            }
            Err(Error::PrecisionFailure {
                n: last_ambiguous,
                detail: "record comparison still ambiguous at the precision cap".into(),
            })
        }
    }
}

fn scan_rotation_exact(angle: &Angle, horizon: u64) -> (Vec<ReturnRecord>, bool) {
    let ta = angle.theta_approx(0);
    let d = &ta.denom;
    let mut acc = BigUint::zero();
    let mut records: Vec<ReturnRecord> = Vec::new();
    let mut d_min: Option<BigUint> = None;
    for n in 1..=horizon {
        acc += &ta.num;
        if acc >= *d {
            acc -= d;
        }
        let dist = acc.clone().min(d - &acc);
        if d_min.as_ref().is_none_or(|dm| dist < *dm) {
            let zero = dist.is_zero();
            d_min = Some(dist.clone());
            records.push(ReturnRecord {
                n,
                distance: Distance::Exact(BigRational::new(
                    BigInt::from(dist),
                    BigInt::from(d.clone()),
                )),
            });
            if zero {
                return (records, true);
            }
        }
    }
    (records, false)
}

/// Runs one certified rotation scan at fixed precision; `Err(n)` reports the
/// first iterate whose record comparison the interval arithmetic could not
/// decide, asking the caller to refine.
fn scan_rotation_certified(
    num: &BigUint,
    denom: &BigUint,
    horizon: u64,
) -> std::result::Result<Vec<ReturnRecord>, u64> {
    let mut acc = BigUint::zero();
    let mut records: Vec<ReturnRecord> = Vec::new();
    // current record distance, as numerators over 2*denom
    let mut d_min: Option<(BigUint, BigUint)> = None;
    for n in 1..=horizon {
        acc += num;
        if acc >= *denom {
            acc -= denom;
        }
        let (c_lo, c_hi) = circle_fold_scaled(&acc, n, denom);
        match &d_min {
            Some((m_lo, m_hi)) => {
                if c_lo >= *m_hi {
                    continue; // provably no improvement
                }
                if c_hi < *m_lo {
                    records.push(ReturnRecord {
                        n,
                        distance: scaled_to_distance(c_lo.clone(), c_hi.clone(), denom),
                    });
                    d_min = Some((c_lo, c_hi));
                } else {
                    return Err(n);
                }
            }
            None => {
                records.push(ReturnRecord {
                    n,
                    distance: scaled_to_distance(c_lo.clone(), c_hi.clone(), denom),
                });
                d_min = Some((c_lo, c_hi));
            }
        }
    }
    Ok(records)
}

fn scaled_to_distance(lo: BigUint, hi: BigUint, denom: &BigUint) -> Distance {
    let two_d: BigInt = BigInt::from(denom.clone()) * 2;
    Distance::certified(
        BigRational::new(BigInt::from(lo), two_d.clone()),
        BigRational::new(BigInt::from(hi), two_d),
    )
}

/// Doubling-map record scan over the binary expansion of a dyadic point.
///
/// The orbit is the left shift on the point's bits, so `d(Tⁿx, x)` is read
/// off the first 128 bits of the shifted-vs-original expansions; that window
/// brackets the distance within `2^-128`, which decides every record
/// comparison except near-exact ties, and those fall back to full-precision
/// subtraction. Confirmed records are stored with their exact distances.
fn scan_doubling(num: &BigUint, depth: u64, horizon: u64) -> (Vec<ReturnRecord>, bool) {
    let words = pack_bits_msb_first(num, depth);
    let x = DyadicBits {
        words: &words,
        depth,
    };
    let mut records: Vec<ReturnRecord> = Vec::new();
    // (exact distance, floor and ceiling of distance * 2^128)
    let mut d_min: Option<(BigRational, u128, u128)> = None;
    let w0 = x.window128(0);
    for n in 1..=horizon {
        let wn = x.window128(n);
        let a = if w0 >= wn { w0 - wn } else { wn - w0 };
        // circle fold: 2^128 - a is a.wrapping_neg() in u128 arithmetic
        let t = if a > (1u128 << 127) { a.wrapping_neg() } else { a };
        let (c_lo, c_hi) = (t.saturating_sub(1), t.saturating_add(1));
        let improved = match &d_min {
            Some((dm, m_lo, m_hi)) => {
                if c_lo >= *m_hi {
                    false // provably no improvement
                } else if c_hi < *m_lo {
                    true
                } else {
                    // ambiguous at window precision: decide exactly
                    exact_doubling_distance(num, depth, n) < *dm
                }
            }
            None => true,
        };
        if improved {
            let d = exact_doubling_distance(num, depth, n);
            let zero = d.is_zero();
            let (m_lo, m_hi) = dyadic_scaled_128(&d);
            d_min = Some((d.clone(), m_lo, m_hi));
            records.push(ReturnRecord {
                n,
                distance: Distance::Exact(d),
            });
            if zero {
                return (records, true);
            }
        }
    }
    (records, false)
}

/// Exact circle distance between `x = num/2^depth` and its `n`-th shift.
fn exact_doubling_distance(num: &BigUint, depth: u64, n: u64) -> BigRational {
    let den = BigUint::one() << depth;
    let shifted = if n >= depth {
        BigUint::zero()
    } else {
        (num << n) % &den
    };
    let diff = if *num >= shifted {
        num - &shifted
    } else {
        &shifted - num
    };
    let dist = diff.clone().min(&den - &diff);
    BigRational::new(BigInt::from(dist), BigInt::from(den))
}

/// Floor and ceiling of `d · 2^128` for an exact dyadic `d = p/2^s ≤ 1/2`.
fn dyadic_scaled_128(d: &BigRational) -> (u128, u128) {
    let p = d.numer().magnitude();
    let s = d.denom().magnitude().bits() - 1; // denom = 2^s exactly
    let to_u128 = |x: &BigUint| -> u128 {
        let mut v: u128 = 0;
        for (i, w) in x.to_u64_digits().iter().enumerate().take(2) {
            v |= (*w as u128) << (64 * i);
        }
        v
    };
    if s <= 128 {
        let m = to_u128(&(p << (128 - s)));
        (m, m)
    } else {
        let m = to_u128(&(p >> (s - 128)));
        (m, m + 1)
    }
}

struct DyadicBits<'a> {
    words: &'a [u64],
    depth: u64,
}

impl DyadicBits<'_> {
    /// The 128 bits starting at bit `offset` of the binary expansion
    /// (zeros past `depth`), as a u128.
    fn window128(&self, offset: u64) -> u128 {
        let hi = self.word64(offset);
        let lo = self.word64(offset + 64);
        ((hi as u128) << 64) | (lo as u128)
    }

    fn word64(&self, offset: u64) -> u64 {
        if offset >= self.depth {
            return 0;
        }
        let j = (offset / 64) as usize;
        let s = (offset % 64) as u32;
        let w0 = self.words.get(j).copied().unwrap_or(0);
        if s == 0 {
            w0
        } else {
            let w1 = self.words.get(j + 1).copied().unwrap_or(0);
            (w0 << s) | (w1 >> (64 - s))
        }
    }
}

/// Packs the binary expansion of `num/2^depth` into 64-bit words, first
/// expansion bit in the top bit of word 0.
fn pack_bits_msb_first(num: &BigUint, depth: u64) -> Vec<u64> {
    let n_words = depth.div_ceil(64) as usize;
    let mut words = vec![0u64; n_words];
    for i in 0..depth {
        if num.bit(depth - 1 - i) {
            words[(i / 64) as usize] |= 1u64 << (63 - (i % 64));
        }
    }
    words
}

/// Distance `d(Tⁿx, x)` for a single iterate, without a full scan: exact for
/// the odometer and doubling map, certified for irrational rotations.
pub fn orbit_distance(system: &System, point: &Point, n: u64) -> Result<Distance> {
    if n == 0 {
        return Err(Error::InvalidArgument("iterate index must be >= 1".into()));
    }
    point.validate_for(system)?;
    match (system, point) {
        (System::Odometer, Point::Code(code)) => {
            Ok(Distance::Exact(odometer_power(code, n).distance(code)))
        }
        (System::Rotation(angle), Point::Circle(_)) => {
            crate::systems::rotation_orbit_distance(angle, n)
        }
        (System::Doubling, Point::Dyadic { num, depth }) => {
            Ok(Distance::Exact(exact_doubling_distance(num, *depth, n)))
        }
        _ => unreachable!("validated above"),
    }
}

/// Finite-horizon stand-in for `liminf n^{1/α} d(Tⁿx, x)`: the minimum of
/// `n_k^{1/α} · d_k` over records with index `k ≥ tail_start`.
///
/// The true liminf over all `n` equals the liminf over records (non-records
/// are dominated), but a finite horizon sees only finitely many of them: the
/// proxy is the minimum over the scanned window, and the true liminf may
/// still be smaller. See [`PROXY_BIAS_NOTE`].
#[derive(Debug, Clone)]
pub struct ProxyValue {
    pub value: f64,
    /// Populated when every tail term is exactly rational: `α = log_q(p)`,
    /// every record time a power of `p`, every distance exact.
    pub exact: Option<BigRational>,
    pub tail_start: usize,
    pub records_used: usize,
}

/// Caveat recorded in every output that carries a proxy value.
pub const PROXY_BIAS_NOTE: &str = "finite-horizon proxy: minimum over scanned records only; \
the true liminf can be smaller than (never provably above) this value";

pub fn liminf_proxy(
    profile: &RecurrenceProfile,
    alpha: &Alpha,
    tail_start: usize,
) -> Result<ProxyValue> {
    alpha.validate()?;
    let tail = profile.records.get(tail_start..).unwrap_or(&[]);
    if tail.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no records past tail start {tail_start} (profile has {})",
            profile.records.len()
        )));
    }
    // Exact route: α = log_q(p) with every tail time a power of p and every
    // distance exact keeps each term n^{1/α}·d = q^k·d rational.
    let mut exact_terms: Option<Vec<BigRational>> = Some(Vec::new());
    for r in tail {
        match (alpha.scaling_factor_exact(r.n), &r.distance) {
            (Some(f), Distance::Exact(d)) => {
                if let Some(ts) = exact_terms.as_mut() {
                    ts.push(BigRational::from_integer(f) * d);
                }
            }
            _ => {
                exact_terms = None;
                break;
            }
        }
    }
    if let Some(terms) = exact_terms {
        let min = terms.into_iter().min().expect("nonempty tail");
        return Ok(ProxyValue {
            value: to_f64(&min),
            exact: Some(min),
            tail_start,
            records_used: tail.len(),
        });
    }
    let mut best = f64::INFINITY;
    for r in tail {
        let term = if r.distance.is_zero() {
            0.0
        } else {
            (alpha.scaling_log(r.n) + r.distance.ln()).exp()
        };
        best = best.min(term);
    }
    Ok(ProxyValue {
        value: best,
        exact: None,
        tail_start,
        records_used: tail.len(),
    })
}

/// How recurrence exponents are extracted from the record sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentMode {
    /// `γ_k = −ln d_k / ln n_k`, one value per record.
    Pointwise,
    /// `γ_k = (ln d_k − ln d_{k+1}) / (ln n_{k+1} − ln n_k)`, one per
    /// consecutive pair. The default: on the odometer it is exact from the
    /// first pair, while pointwise carries an `O(1/k)` offset from the
    /// constant factor in `d_k`.
    Pairwise,
}

impl fmt::Display for ExponentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentMode::Pointwise => write!(f, "pointwise"),
            ExponentMode::Pairwise => write!(f, "pairwise"),
        }
    }
}

impl FromStr for ExponentMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pointwise" => Ok(ExponentMode::Pointwise),
            "pairwise" => Ok(ExponentMode::Pairwise),
            other => Err(Error::Parse(format!("unknown exponent mode '{other}'"))),
        }
    }
}

/// Recurrence exponents estimating the decay `d_k ≍ n_k^{-γ}`.
#[derive(Debug, Clone)]
pub struct ExponentSequence {
    pub mode: ExponentMode,
    /// Record times the exponents were computed from (pairwise values are
    /// indexed by the earlier time of each pair).
    pub times: Vec<u64>,
    pub values: Vec<f64>,
}

pub fn exponent_sequence(
    profile: &RecurrenceProfile,
    mode: ExponentMode,
) -> Result<ExponentSequence> {
    for r in &profile.records {
        if r.distance.is_zero() {
            return Err(Error::PeriodicPoint { n: r.n });
        }
    }
    let one = BigRational::one();
    let usable: Vec<&ReturnRecord> = profile
        .records
        .iter()
        .filter(|r| r.n >= 2 && *r.distance.upper() < one)
        .collect();
    if usable.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need >= 2 records with n >= 2 and d in (0,1), have {}",
            usable.len()
        )));
    }
    let values = match mode {
        ExponentMode::Pointwise => usable
            .iter()
            .map(|r| -r.distance.ln() / (r.n as f64).ln())
            .collect(),
        ExponentMode::Pairwise => usable
            .windows(2)
            .map(|w| {
                ln_distance_ratio(&w[0].distance, &w[1].distance)
                    / (w[1].n as f64 / w[0].n as f64).ln()
            })
            .collect(),
    };
    let times = match mode {
        ExponentMode::Pointwise => usable.iter().map(|r| r.n).collect(),
        ExponentMode::Pairwise => usable[..usable.len() - 1].iter().map(|r| r.n).collect(),
    };
    Ok(ExponentSequence { mode, times, values })
}

/// `ln(a/b)`, through the exact ratio when both distances are exact.
fn ln_distance_ratio(a: &Distance, b: &Distance) -> f64 {
    match (a, b) {
        (Distance::Exact(da), Distance::Exact(db)) => ln_rational(&(da / db)),
        _ => a.ln() - b.ln(),
    }
}

/// Lower bound on the Hausdorff dimension from the tail recurrence exponents:
/// `1 / max(exponents from index tail_start on)`.
///
/// For every `α` strictly below this value the scaled terms `n_k^{1/α} d_k`
/// grow along the tail records, the liminf diverges, and `H_α` must be
/// infinite — which is the statement `dim ≥ α`.
pub fn dim_lower_bound(
    profile: &RecurrenceProfile,
    tail_start: usize,
    mode: ExponentMode,
) -> Result<f64> {
    let seq = exponent_sequence(profile, mode)?;
    let tail = seq.values.get(tail_start..).unwrap_or(&[]);
    if tail.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no exponents past tail start {tail_start} (sequence has {})",
            seq.values.len()
        )));
    }
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(1.0 / max)
}
