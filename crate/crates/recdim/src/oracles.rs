//! Independent reference implementations used to validate the main code paths.
//!
//! Everything here recomputes its answers from scratch — the closed-form
//! digit-case analysis for odometer jumps, continued-fraction best
//! approximations for rotation records, and naive running-minimum record
//! scans. None of it calls the stepping or distance code it is meant to
//! check: the point of this module is that agreement between the two paths
//! is evidence, so they must not share implementations.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;

use crate::numeric::{pow3, Distance};
use crate::recurrence::ReturnRecord;
use crate::symbolic::SymbolCode;
use crate::systems::{Angle, Point, System};
use crate::{Error, Result};

/// A continued-fraction convergent `p/q` of a rotation angle, with the
/// certified (or exact) distance `‖qθ‖`.
#[derive(Debug, Clone)]
pub struct Convergent {
    pub p: BigUint,
    pub q: BigUint,
    pub dist: Distance,
}

/// Exact `|T^{2^k}(x) − x|` for the adding machine, by digit-case analysis.
///
/// Adding `2^k` leaves digits before position `k` alone. Writing positions
/// 1-based as in the coding `x = Σ 2 x_i / 3^i`:
///
/// - `x_{k+1} = 0`: that digit flips to 1 and nothing else moves — distance
///   `2/3^{k+1}`.
/// - `x_{k+1} = 1, x_{k+2} = 0`: one carry — distance `4/3^{k+2}`.
/// - `x_{k+1} = x_{k+2} = 1`: the carry runs through the block of ones; the
///   exact value comes from summing the flipped digits and always exceeds
///   `2/3^{k+1}`.
pub fn odometer_jump_distance(code: &SymbolCode, k: u32) -> BigRational {
    let k = k as usize;
    if code.digit(k) == 0 {
        return BigRational::new(2.into(), pow3(k as u64 + 1));
    }
    // length of the run of ones starting at position k (0-based); the window
    // below covers the rest of the preperiod plus one full period, so a zero
    // exists in the tail iff it appears there
    let window_end = code.preperiod().len().max(k + 1) + code.period().len();
    let run = (k..window_end).take_while(|&i| code.digit(i) == 1).count();
    if k + run >= window_end {
        // all-ones tail: every digit from position k flips to 0
        return BigRational::new(1.into(), pow3(k as u64));
    }
    // digits k..k+run-1 flip 1 -> 0, digit k+run flips 0 -> 1
    let mut d = BigRational::zero();
    for i in k..k + run {
        d += BigRational::new(2.into(), pow3(i as u64 + 1));
    }
    d -= BigRational::new(2.into(), pow3((k + run) as u64 + 1));
    d
}

/// Continued-fraction terms of an angle, recomputed locally: Euclid's
/// algorithm for rationals, the head/cycle description otherwise.
fn cf_terms(angle: &Angle, count: usize) -> Vec<BigUint> {
    match angle {
        Angle::Rational(r) => {
            // terms of frac(θ) = [0; a1, a2, ...]
            let mut terms = vec![BigUint::zero()];
            let q = r.denom().magnitude().clone();
            let p = {
                use num_integer::Integer;
                r.numer().mod_floor(r.denom()).magnitude().clone()
            };
            let (mut a, mut b) = (q, p);
            while !b.is_zero() && terms.len() < count {
                terms.push(&a / &b);
                let r = &a % &b;
                a = std::mem::replace(&mut b, r);
            }
            terms
        }
        Angle::Cf { head, cycle } => (0..count)
            .map(|i| {
                BigUint::from(if i < head.len() {
                    head[i]
                } else {
                    cycle[(i - head.len()) % cycle.len()]
                })
            })
            .collect(),
    }
}

/// Two-sided enclosure of an angle by backward evaluation of its truncated
/// continued fraction: the tail beyond the cutoff lies in `(a_cut, a_cut+1)`,
/// and `x_k = a_k + 1/x_{k+1}` propagates the bracket to the front.
fn theta_interval(angle: &Angle, depth: usize) -> (BigRational, BigRational) {
    match angle {
        Angle::Rational(r) => (r.clone(), r.clone()),
        Angle::Cf { .. } => {
            let terms = cf_terms(angle, depth + 1);
            let last = BigRational::from_integer(BigInt::from(terms[depth].clone()));
            let (mut lo, mut hi) = (last.clone(), last + BigRational::one());
            for a in terms[..depth].iter().rev() {
                let a = BigRational::from_integer(BigInt::from(a.clone()));
                let new_lo = &a + hi.recip();
                let new_hi = &a + lo.recip();
                lo = new_lo;
                hi = new_hi;
            }
            (lo, hi)
        }
    }
}

/// Best rational approximations of a rotation angle: convergents `p_k/q_k`
/// with exact or certified `‖q_kθ‖`, strictly increasing `q` and strictly
/// decreasing distance. For rational angles the list ends at the exact
/// return (`dist = 0`).
pub fn cf_best_approximations(angle: &Angle, count: usize) -> Result<Vec<Convergent>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    let max_terms = match angle {
        Angle::Rational(_) => usize::MAX,
        Angle::Cf { .. } => count + 2,
    };
    let terms = cf_terms(angle, max_terms.min(count + 2));
    let mut out: Vec<Convergent> = Vec::new();
    let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
    let (mut p_cur, mut q_cur) = (terms[0].clone(), BigUint::one());
    for k in 0.. {
        if out.len() >= count && out.last().map(|c| c.q != q_cur).unwrap_or(true) {
            break;
        }
        let dist = convergent_distance(angle, &p_cur, &q_cur, k)?;
        let entry = Convergent {
            p: p_cur.clone(),
            q: q_cur.clone(),
            dist,
        };
        // same q: the later convergent approximates strictly better
        match out.last_mut() {
            Some(last) if last.q == entry.q => *last = entry,
            _ => out.push(entry),
        }
        if out.last().unwrap().dist.is_zero() {
            break;
        }
        if k + 1 >= terms.len() {
            break;
        }
        let a = &terms[k + 1];
        let p_next = a * &p_cur + &p_prev;
        let q_next = a * &q_cur + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);
    }
    out.truncate(count);
    Ok(out)
}

/// `‖qθ − p‖` for a convergent pair, exact for rational angles and certified
/// (relative width below `2^-40`) otherwise.
fn convergent_distance(angle: &Angle, p: &BigUint, q: &BigUint, index: usize) -> Result<Distance> {
    match angle {
        Angle::Rational(r) => {
            let theta_q = BigRational::new(
                r.numer() * BigInt::from(q.clone()),
                r.denom().clone(),
            );
            let d = (theta_q - BigRational::from_integer(BigInt::from(p.clone()))).abs();
            // fold onto the circle in case p was not the nearest integer
            let frac = &d - d.floor();
            let dist = frac.clone().min(BigRational::one() - &frac);
            Ok(Distance::Exact(dist))
        }
        Angle::Cf { .. } => {
            let mut depth = index + 40;
            for _ in 0..8 {
                let (lo, hi) = theta_interval(angle, depth);
                let q_rat = BigRational::from_integer(BigInt::from(q.clone()));
                let p_rat = BigRational::from_integer(BigInt::from(p.clone()));
                let a = &q_rat * &lo - &p_rat;
                let b = &q_rat * &hi - &p_rat;
                let (lo_d, hi_d) = if !a.is_negative() && !b.is_negative() {
                    (a.clone().min(b.clone()), a.max(b))
                } else if a.is_negative() && b.is_negative() {
                    ((-b.clone()).min(-a.clone()), (-a).max(-b))
                } else {
                    depth *= 2;
                    continue; // interval spans 0: sharpen
                };
                let width = &hi_d - &lo_d;
                if !lo_d.is_zero() && width * BigInt::from(1u64 << 40) <= lo_d {
                    return Ok(Distance::certified(lo_d, hi_d));
                }
                depth *= 2;
            }
            Err(Error::PrecisionFailure {
                n: q.to_u64().unwrap_or(u64::MAX),
                detail: "convergent distance did not certify".into(),
            })
        }
    }
}

/// Direct `O(N)` running-minimum record scan with no shortcuts: the
/// reference implementation for [`crate::recurrence::scan_records`]. Shares
/// no stepping or distance code with it.
pub fn naive_record_scan(system: &System, point: &Point, horizon: u64) -> Result<Vec<ReturnRecord>> {
    if horizon == 0 || horizon > 1_000_000 {
        return Err(Error::InvalidArgument(
            "reference scan supports 1 <= horizon <= 10^6".into(),
        ));
    }
    point.validate_for(system)?;
    match (system, point) {
        (System::Odometer, Point::Code(code)) => Ok(naive_odometer(code, horizon)),
        (System::Rotation(angle), Point::Circle(_)) => naive_rotation(angle, horizon),
        (System::Doubling, Point::Dyadic { num, depth }) => Ok(naive_doubling(num, *depth, horizon)),
        _ => unreachable!("validated above"),
    }
}

fn naive_odometer(code: &SymbolCode, horizon: u64) -> Vec<ReturnRecord> {
    let (a0, b) = code_to_two_adic(code);
    let val0 = cantor_value_of_two_adic(a0.clone(), &b);
    let mut records = Vec::new();
    let mut d_min: Option<BigRational> = None;
    for n in 1..=horizon {
        let val_n = cantor_value_of_two_adic(&a0 + BigInt::from(n) * &b, &b);
        let d = (&val_n - &val0).abs();
        if d_min.as_ref().is_none_or(|m| d < *m) {
            d_min = Some(d.clone());
            records.push(ReturnRecord {
                n,
                distance: Distance::Exact(d),
            });
        }
    }
    records
}

/// Reads a code as the 2-adic rational `a/b` (`b` odd, positive) it expands.
fn code_to_two_adic(code: &SymbolCode) -> (BigInt, BigInt) {
    let p = code.preperiod().len();
    let q = code.period().len();
    let mut head = BigInt::zero();
    for i in (0..p).rev() {
        head = head * 2 + code.digit(i);
    }
    let mut cyc = BigInt::zero();
    for i in (p..p + q).rev() {
        cyc = cyc * 2 + code.digit(i);
    }
    let b = (BigInt::one() << q) - 1;
    (head * &b - (cyc << p), b)
}

/// Cantor point value of the binary sequence that is the 2-adic expansion of
/// `a/b`: extracts digits (with cycle detection) and sums the geometric
/// series in closed form.
fn cantor_value_of_two_adic(mut a: BigInt, b: &BigInt) -> BigRational {
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut digits: Vec<u8> = Vec::new();
    let (pre, per) = loop {
        if let Some(&at) = seen.get(&a) {
            let per = digits.split_off(at);
            break (digits, per);
        }
        seen.insert(a.clone(), digits.len());
        use num_integer::Integer;
        let d = if a.is_odd() { 1u8 } else { 0u8 };
        digits.push(d);
        if d == 1 {
            a -= b;
        }
        a /= 2;
    };
    // Σ 2 d_i / 3^(i+1) over preperiod, plus the periodic tail summed exactly
    let mut head_sum = BigRational::zero();
    for (i, &d) in pre.iter().enumerate() {
        if d == 1 {
            head_sum += BigRational::new(2.into(), pow3(i as u64 + 1));
        }
    }
    let mut cyc_sum = BigRational::zero();
    for (i, &d) in per.iter().enumerate() {
        if d == 1 {
            cyc_sum += BigRational::new(2.into(), pow3(i as u64 + 1));
        }
    }
    let q = per.len() as u64;
    let tail_factor = BigRational::new(pow3(q), pow3(q) - 1);
    let scale = BigRational::new(1.into(), pow3(pre.len() as u64));
    head_sum + scale * cyc_sum * tail_factor
}

fn naive_rotation(angle: &Angle, horizon: u64) -> Result<Vec<ReturnRecord>> {
    let mut depth = 48usize;
    'retry: for _ in 0..10 {
        let (lo, hi) = theta_interval(angle, depth);
        let mut records: Vec<ReturnRecord> = Vec::new();
        let mut d_min: Option<(BigRational, BigRational)> = None;
        for n in 1..=horizon {
            let n_rat = BigRational::from_integer(BigInt::from(n));
            let (c_lo, c_hi) = match circle_distance_interval(&(&n_rat * &lo), &(&n_rat * &hi)) {
                Some(iv) => iv,
                None => {
                    depth *= 2;
                    continue 'retry;
                }
            };
            let improved = match &d_min {
                Some((m_lo, m_hi)) => {
                    if c_lo >= *m_hi {
                        false
                    } else if c_hi < *m_lo {
                        true
                    } else if c_lo == c_hi && m_lo == m_hi {
                        // both exact (rational angle): decide directly
                        c_lo < *m_lo
                    } else {
                        depth *= 2;
                        continue 'retry;
                    }
                }
                None => true,
            };
            if improved {
                let zero = c_hi.is_zero();
                let distance = if c_lo == c_hi {
                    Distance::Exact(c_lo.clone())
                } else {
                    Distance::certified(c_lo.clone(), c_hi.clone())
                };
                d_min = Some((c_lo, c_hi));
                records.push(ReturnRecord { n, distance });
                if zero {
                    return Ok(records);
                }
            }
        }
        return Ok(records);
    }
    Err(Error::PrecisionFailure {
        n: 0,
        detail: "reference rotation scan did not certify".into(),
    })
}

/// Distance of `[lo, hi] ⊂ ℝ` to the nearest integer, as an interval; `None`
/// when the input is too wide to say anything.
fn circle_distance_interval(
    lo: &BigRational,
    hi: &BigRational,
) -> Option<(BigRational, BigRational)> {
    let one = BigRational::one();
    let half = BigRational::new(1.into(), 2.into());
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

fn naive_doubling(num: &BigUint, depth: u64, horizon: u64) -> Vec<ReturnRecord> {
    let den = BigInt::one() << depth;
    let x0 = BigRational::new(BigInt::from(num.clone()), den.clone());
    let one = BigRational::one();
    let mut y = x0.clone();
    let mut records = Vec::new();
    let mut d_min: Option<BigRational> = None;
    for n in 1..=horizon {
        y = &y + &y;
        if y >= one {
            y -= &one;
        }
        let diff = (&y - &x0).abs();
        let d = diff.clone().min(&one - &diff);
        if d_min.as_ref().is_none_or(|m| d < *m) {
            let zero = d.is_zero();
            d_min = Some(d.clone());
            records.push(ReturnRecord {
                n,
                distance: Distance::Exact(d),
            });
            if zero {
                break;
            }
        }
    }
    records
}

/// Record-list agreement between two independently computed scans: same
/// record times, exact distances identical, certified distances overlapping.
pub fn records_equivalent(a: &[ReturnRecord], b: &[ReturnRecord]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.n == y.n && x.distance.consistent_with(&y.distance))
}
