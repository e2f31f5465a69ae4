//! First-return (induced) systems on balls and cylinders.
//!
//! For a ball `B` of positive measure, the first-return map `S` sends
//! `y ∈ B` to `T^{n₁(y)}(y)`, its first revisit. `S` preserves the
//! conditional measure `ν = μ(· ∩ B)/μ(B)`, the return-time ratios `k/n_k`
//! converge to `μ(B)` (the ergodic theorem; Kac's lemma in mean), and the
//! closest returns of `y` under `T` eventually happen at return times — the
//! mechanism that transfers recurrence bounds from `B` up to the whole
//! space, quantitatively:
//!
//! ```text
//! μ(B)^{1/α} · liminf n^{1/α} d(Tⁿy, y)  ≤  liminf k^{1/α} d(Sᵏy, y).
//! ```
//!
//! This module computes return-time sequences, checks the ergodic-ratio and
//! pigeonhole predictions, and evaluates both sides of that transfer
//! inequality on finite horizons.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::numeric::{to_f64, Alpha, Distance};
use crate::recurrence::{liminf_proxy, orbit_distance, scan_records};
use crate::symbolic::{random_digits, SymbolCode};
use crate::systems::{
    circle_distance_interval_rational, cylinder_measure, odometer_step, Angle, CylinderSpec,
    Point, System,
};
use crate::{Error, Result};

/// A positive-measure set to induce on: a cylinder (odometer) or a closed
/// metric ball (rotation / doubling).
#[derive(Debug, Clone, PartialEq)]
pub enum BallSpec {
    Cylinder { prefix: Vec<u8> },
    Ball { center: BigRational, radius: BigRational },
}

impl BallSpec {
    /// μ-measure of the set: `2^-m` for a depth-`m` cylinder, arc length
    /// `min(2r, 1)` for a ball.
    pub fn measure(&self, system: &System) -> Result<BigRational> {
        match (system, self) {
            (System::Odometer, BallSpec::Cylinder { prefix }) => {
                cylinder_measure(system, &CylinderSpec::Prefix(prefix.clone()))
            }
            (System::Rotation(_) | System::Doubling, BallSpec::Ball { center, radius }) => {
                if !radius.is_positive() {
                    return Err(Error::InvalidArgument("ball radius must be positive".into()));
                }
                if center.is_negative() || *center >= BigRational::one() {
                    return Err(Error::InvalidArgument("ball center outside [0, 1)".into()));
                }
                let two_r = radius + radius;
                Ok(two_r.min(BigRational::one()))
            }
            _ => Err(Error::InvalidArgument(
                "ball spec does not match the system kind (odometer takes cylinders, \
                 rotation/doubling take metric balls)"
                    .into(),
            )),
        }
    }
}

/// Return times of one orbit to its ball, with the base point.
#[derive(Debug, Clone)]
pub struct InducedProfile {
    pub base_point: Point,
    /// Strictly increasing times `n_k` with `T^{n_k}(y) ∈ B` and no visits
    /// in between.
    pub return_times: Vec<u64>,
}

impl InducedProfile {
    /// The ergodic ratios `k / n_k` as exact rationals.
    pub fn ratios(&self) -> Vec<BigRational> {
        self.return_times
            .iter()
            .enumerate()
            .map(|(i, &n)| BigRational::new(BigInt::from(i as u64 + 1), BigInt::from(n)))
            .collect()
    }
}

/// Collects the first `count` return times of `y` to the ball, scanning at
/// most `budget` iterates. Membership tests are exact (cylinder prefixes,
/// dyadic arithmetic) or certified (irrational rotations, with refinement).
pub fn first_return_times(
    system: &System,
    ball: &BallSpec,
    y: &Point,
    count: usize,
    budget: u64,
) -> Result<InducedProfile> {
    y.validate_for(system)?;
    ball.measure(system)?; // validates the spec/system pairing
    match (system, ball, y) {
        (System::Odometer, BallSpec::Cylinder { prefix }, Point::Code(code)) => {
            if !code_has_prefix(code, prefix) {
                return Err(Error::InvalidArgument(
                    "base point is not in the cylinder".into(),
                ));
            }
            let mut times = Vec::with_capacity(count);
            let mut current = code.clone();
            for n in 1..=budget {
                if times.len() >= count {
                    break;
                }
                current = odometer_step(&current);
                if code_has_prefix(&current, prefix) {
                    times.push(n);
                }
            }
            finish_profile(y, times, count, budget)
        }
        (System::Rotation(angle), BallSpec::Ball { center, radius }, Point::Circle(pos)) => {
            rotation_return_times(angle, center, radius, pos, count, budget)
                .and_then(|times| finish_profile(y, times, count, budget))
        }
        (System::Doubling, BallSpec::Ball { center, radius }, Point::Dyadic { num, depth }) => {
            let den = BigInt::one() << *depth;
            let x0 = BigRational::new(BigInt::from(num.clone()), den);
            if circle_metric(&x0, center) > *radius {
                return Err(Error::InvalidArgument(
                    "base point is not in the ball".into(),
                ));
            }
            let one = BigRational::one();
            let mut yv = x0;
            let mut times = Vec::with_capacity(count);
            for n in 1..=budget {
                if times.len() >= count {
                    break;
                }
                yv = &yv + &yv;
                if yv >= one {
                    yv -= &one;
                }
                if circle_metric(&yv, center) <= *radius {
                    times.push(n);
                }
            }
            finish_profile(y, times, count, budget)
        }
        _ => unreachable!("validated above"),
    }
}

fn finish_profile(y: &Point, times: Vec<u64>, count: usize, budget: u64) -> Result<InducedProfile> {
    if times.len() < count {
        return Err(Error::BudgetExceeded {
            iterations: budget,
            returns_found: times.len(),
        });
    }
    Ok(InducedProfile {
        base_point: y.clone(),
        return_times: times,
    })
}

fn code_has_prefix(code: &SymbolCode, prefix: &[u8]) -> bool {
    prefix.iter().enumerate().all(|(i, &d)| code.digit(i) == d)
}

/// Exact circle distance between two rationals in `[0, 1)`.
fn circle_metric(a: &BigRational, b: &BigRational) -> BigRational {
    let d = (a - b).abs();
    let one = BigRational::one();
    d.clone().min(&one - &d)
}

fn rotation_return_times(
    angle: &Angle,
    center: &BigRational,
    radius: &BigRational,
    pos: &BigRational,
    count: usize,
    budget: u64,
) -> Result<Vec<u64>> {
    if circle_metric(pos, center) > *radius {
        return Err(Error::InvalidArgument(
            "base point is not in the ball".into(),
        ));
    }
    let delta = pos - center;
    let mut bits = 96u64;
    'retry: for _ in 0..10 {
        let ta = angle.theta_approx(bits);
        let theta_lo = BigRational::new(BigInt::from(ta.num.clone()), BigInt::from(ta.denom.clone()));
        let theta_hi = if ta.exact {
            theta_lo.clone()
        } else {
            BigRational::new(
                BigInt::from(&ta.num + 1u32),
                BigInt::from(ta.denom.clone()),
            )
        };
        let mut times = Vec::with_capacity(count);
        let mut lo = delta.clone();
        let mut hi = delta.clone();
        for n in 1..=budget {
            if times.len() >= count {
                break;
            }
            lo += &theta_lo;
            hi += &theta_hi;
            // position distance to the ball center, as an interval
            let (d_lo, d_hi) = match circle_distance_interval_rational(&lo, &hi) {
                Some(iv) => iv,
                None => {
                    bits *= 2;
                    continue 'retry;
                }
            };
            if d_hi <= *radius {
                times.push(n);
            } else if d_lo > *radius {
                // provably outside
            } else if ta.exact {
                if d_lo <= *radius {
                    times.push(n);
                }
            } else {
                bits *= 2;
                continue 'retry;
            }
        }
        return Ok(times);
    }
    Err(Error::PrecisionFailure {
        n: 0,
        detail: "ball membership still ambiguous at the precision cap".into(),
    })
}

/// Report of the ergodic-theorem check `k/n_k → μ(B)`.
#[derive(Debug, Clone)]
pub struct RatioReport {
    pub returns: usize,
    pub final_time: u64,
    /// Exact final ratio `k / n_k`.
    pub ratio: BigRational,
    pub measure: BigRational,
    /// `|ratio − μ(B)| / μ(B)`.
    pub relative_gap: f64,
    pub tolerance: f64,
    pub flagged: bool,
}

/// Compares the final return ratio `k/n_k` with the ball measure; flags the
/// report when the relative gap exceeds the tolerance.
pub fn ergodic_ratio_check(
    profile: &InducedProfile,
    measure: &BigRational,
    tolerance: f64,
) -> Result<RatioReport> {
    let k = profile.return_times.len();
    if k < 10 {
        return Err(Error::InsufficientData(format!(
            "ergodic ratio check needs >= 10 returns, have {k}"
        )));
    }
    let final_time = *profile.return_times.last().unwrap();
    let ratio = BigRational::new(BigInt::from(k as u64), BigInt::from(final_time));
    let relative_gap = to_f64(&((&ratio - measure) / measure)).abs();
    Ok(RatioReport {
        returns: k,
        final_time,
        ratio,
        measure: measure.clone(),
        relative_gap,
        tolerance,
        flagged: relative_gap > tolerance,
    })
}

/// Minimal `n` with `U ∩ T⁻ⁿU ≠ ∅`, for a cylinder or arc `U` of measure
/// `u`. Invariance of μ forces such an `n` within `⌈1 + 1/u⌉`: if the sets
/// `U, T⁻¹U, …` were pairwise disjoint that far out, their union would have
/// measure above 1.
pub fn pigeonhole_return(system: &System, spec: &CylinderSpec) -> Result<u64> {
    let u = cylinder_measure(system, spec)?;
    let cap_rat = (BigRational::one() + u.recip()).ceil();
    let cap = cap_rat
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument("set measure too small: search cap overflows".into()))?;
    match (system, spec) {
        (System::Odometer, CylinderSpec::Prefix(prefix)) => {
            // Tⁿ maps a depth-m cylinder onto the cylinder of w + n mod 2^m,
            // so the intersection is nonempty exactly when the first m digits
            // return; decided by stepping the word's left endpoint.
            let mut current = SymbolCode::new(prefix.clone(), vec![0])?;
            for n in 1..=cap {
                current = odometer_step(&current);
                if code_has_prefix(&current, prefix) {
                    return Ok(n);
                }
            }
            Err(Error::Internal("pigeonhole cap exceeded on a cylinder".into()))
        }
        (System::Rotation(angle), CylinderSpec::Arc { a, b }) => {
            // arcs of equal length overlap after rotation by nθ iff ‖nθ‖ < u
            let u = b - a;
            for n in 1..=cap {
                if rotation_dist_strictly_below(angle, n, &u)? {
                    return Ok(n);
                }
            }
            Err(Error::Internal("pigeonhole cap exceeded on an arc".into()))
        }
        (System::Doubling, CylinderSpec::Arc { a, b }) => {
            for n in 1..=cap.min(4 * 64) {
                if doubling_arc_self_intersects(a, b, n) {
                    return Ok(n);
                }
            }
            // 2^n u ≥ 1 guarantees intersection long before n = 256
            Err(Error::Internal("pigeonhole cap exceeded on a doubling arc".into()))
        }
        _ => Err(Error::InvalidArgument(
            "set spec does not match the system kind".into(),
        )),
    }
}

/// Certified decision of `‖nθ‖ < bound` (with exact fallback for rational
/// angles), refining precision until decidable.
fn rotation_dist_strictly_below(angle: &Angle, n: u64, bound: &BigRational) -> Result<bool> {
    let mut bits = 96u64;
    for _ in 0..10 {
        let ta = angle.theta_approx(bits);
        let (lo, hi) = ta.circle_distance(n);
        if hi < *bound {
            return Ok(true);
        }
        if lo >= *bound {
            return Ok(false);
        }
        if ta.exact {
            return Ok(lo < *bound);
        }
        bits *= 2;
    }
    Err(Error::PrecisionFailure {
        n,
        detail: "arc-overlap comparison still ambiguous at the precision cap".into(),
    })
}

/// Does `[a,b) ∩ T⁻ⁿ[a,b) ≠ ∅` hold for the doubling map? Exact: the
/// preimage is the union of the `2^n` shrunken copies `[(a+j)/2^n, (b+j)/2^n)`,
/// which meets `[a,b)` iff some integer `j ∈ (2^n a − b, 2^n b − a)` lies in
/// `[0, 2^n − 1]`.
fn doubling_arc_self_intersects(a: &BigRational, b: &BigRational, n: u64) -> bool {
    let two_n = BigRational::from_integer(BigInt::one() << n);
    let lo = &two_n * a - b; // open
    let hi = &two_n * b - a; // open
    let j_min = (lo.floor() + BigRational::one()).to_integer();
    let j_max = {
        let c = hi.ceil();
        (if c == hi { hi.clone() } else { c } - BigRational::one()).to_integer()
    };
    let j_min = j_min.max(BigInt::zero());
    let j_max = j_max.min(BigInt::from((BigUint::one() << n) - 1u32));
    j_min <= j_max
}

/// Both sides of the record-transfer inequality on finite horizons.
#[derive(Debug, Clone)]
pub struct TransferReport {
    pub mu_b: BigRational,
    pub alpha: f64,
    /// Liminf proxy of the base system at `y`.
    pub base_proxy: f64,
    /// Liminf proxy of the induced map at `y`, distances in the base metric.
    pub induced_proxy: f64,
    /// `μ(B)^{1/α} · base_proxy`.
    pub lhs: f64,
    /// `induced_proxy`.
    pub rhs: f64,
    /// `rhs − lhs`; both sides are finite-horizon proxies, so small negative
    /// slack is honest noise rather than a violation.
    pub slack: f64,
    pub base_horizon: u64,
    pub induced_returns: usize,
}

/// Evaluates the transfer inequality
/// `μ(B)^{1/α} · liminf n^{1/α} d(Tⁿy,y) ≤ liminf k^{1/α} d(Sᵏy,y)`
/// with both liminfs replaced by their finite-horizon record proxies.
#[allow(clippy::too_many_arguments)]
pub fn induced_record_transfer(
    system: &System,
    ball: &BallSpec,
    y: &Point,
    alpha: &Alpha,
    base_horizon: u64,
    induced_returns: usize,
    budget: u64,
    tail_start: usize,
) -> Result<TransferReport> {
    alpha.validate()?;
    let mu_b = ball.measure(system)?;
    let base = scan_records(system, y, base_horizon)?;
    let base_proxy = liminf_proxy(&base, alpha, tail_start)?;
    let profile = first_return_times(system, ball, y, induced_returns, budget)?;

    // closest returns of the induced map S, distances in the base metric
    let mut induced_records: Vec<(u64, Distance)> = Vec::new();
    for (i, &n_k) in profile.return_times.iter().enumerate() {
        let k = i as u64 + 1;
        let d = orbit_distance_resolving(system, y, n_k, induced_records.last().map(|r| &r.1))?;
        let improved = match induced_records.last() {
            Some((_, last)) => d.strictly_less(last).ok_or(Error::PrecisionFailure {
                n: n_k,
                detail: "induced record comparison did not certify".into(),
            })?,
            None => true,
        };
        if improved {
            induced_records.push((k, d));
        }
    }
    let tail = induced_records.get(tail_start..).unwrap_or(&[]);
    if tail.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no induced records past tail start {tail_start} ({} total)",
            induced_records.len()
        )));
    }
    let induced_proxy = tail
        .iter()
        .map(|(k, d)| {
            if d.is_zero() {
                0.0
            } else {
                (alpha.scaling_log(*k) + d.ln()).exp()
            }
        })
        .fold(f64::INFINITY, f64::min);

    let a = alpha.as_f64();
    let lhs = (crate::numeric::ln_rational(&mu_b) / a).exp() * base_proxy.value;
    let rhs = induced_proxy;
    Ok(TransferReport {
        mu_b,
        alpha: a,
        base_proxy: base_proxy.value,
        induced_proxy,
        lhs,
        rhs,
        slack: rhs - lhs,
        base_horizon,
        induced_returns: profile.return_times.len(),
    })
}

/// [`orbit_distance`] re-certified until it compares cleanly against the
/// previous induced record (irrational rotations refine; exact systems
/// return immediately).
fn orbit_distance_resolving(
    system: &System,
    y: &Point,
    n: u64,
    previous: Option<&Distance>,
) -> Result<Distance> {
    let mut d = orbit_distance(system, y, n)?;
    if let (System::Rotation(angle @ Angle::Cf { .. }), Some(prev)) = (system, previous) {
        let mut rel_bits = 60u32;
        while d.strictly_less(prev).is_none() && rel_bits <= 960 {
            d = crate::systems::rotation_orbit_distance_with(angle, n, rel_bits)?;
            rel_bits *= 2;
        }
    }
    Ok(d)
}

/// ν-uniform sample inside a cylinder: the prefix followed by fair digits up
/// to `depth`, deterministic in the seed.
pub fn random_code_in_cylinder(prefix: &[u8], depth: usize, seed: u64) -> Result<SymbolCode> {
    if depth < prefix.len() {
        return Err(Error::InvalidArgument(
            "sample depth must be at least the prefix length".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digits = prefix.to_vec();
    digits.extend(random_digits(&mut rng, depth - prefix.len()));
    SymbolCode::new(digits, vec![0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use crate::recurrence::ReturnRecord;

    #[test]
    fn odometer_cylinder_returns_every_2_to_m() {
        for m in 1..=6usize {
            let prefix = vec![0u8; m];
            let ball = BallSpec::Cylinder { prefix: prefix.clone() };
            let y = Point::Code(SymbolCode::zero());
            let profile =
                first_return_times(&System::Odometer, &ball, &y, 12, 1 << 16).unwrap();
            for (i, &n) in profile.return_times.iter().enumerate() {
                assert_eq!(n, (i as u64 + 1) << m);
            }
        }
    }

    #[test]
    fn zero_returns_requested_gives_empty_profile() {
        let ball = BallSpec::Cylinder { prefix: vec![0, 1] };
        let y = Point::Code("01(0)".parse().unwrap());
        let profile = first_return_times(&System::Odometer, &ball, &y, 0, 10).unwrap();
        assert!(profile.return_times.is_empty());
    }

    #[test]
    fn budget_exhaustion_reports_progress() {
        let ball = BallSpec::Cylinder { prefix: vec![0, 0, 0] };
        let y = Point::Code(SymbolCode::zero());
        let err = first_return_times(&System::Odometer, &ball, &y, 10, 20).unwrap_err();
        assert!(matches!(
            err,
            Error::BudgetExceeded { iterations: 20, returns_found: 2 }
        ));
    }

    #[test]
    fn base_point_must_lie_in_ball() {
        let ball = BallSpec::Cylinder { prefix: vec![1] };
        let y = Point::Code(SymbolCode::zero());
        assert!(first_return_times(&System::Odometer, &ball, &y, 1, 10).is_err());
    }

    #[test]
    fn rotation_half_arc_returns() {
        // θ = 1/2, ball around 0 of radius 1/20: returns at every even time
        let sys = System::Rotation(Angle::Rational(rat(1, 2)));
        let ball = BallSpec::Ball { center: rat(0, 1), radius: rat(1, 20) };
        let y = Point::Circle(rat(0, 1));
        let profile = first_return_times(&sys, &ball, &y, 10, 100).unwrap();
        let expect: Vec<u64> = (1..=10).map(|k| 2 * k).collect();
        assert_eq!(profile.return_times, expect);
    }

    #[test]
    fn golden_rotation_ball_returns_certified() {
        let sys = System::Rotation(Angle::golden());
        let ball = BallSpec::Ball { center: rat(0, 1), radius: rat(1, 20) };
        let y = Point::Circle(rat(0, 1));
        let profile = first_return_times(&sys, &ball, &y, 25, 1 << 12).unwrap();
        assert_eq!(profile.return_times.len(), 25);
        // every return time really is within the ball, by the certified
        // single-iterate distance
        for &n in &profile.return_times {
            let d = orbit_distance(&sys, &y, n).unwrap();
            assert!(*d.upper() <= rat(1, 20));
        }
    }

    #[test]
    fn ergodic_ratio_exact_on_cylinders() {
        let m = 3usize;
        let ball = BallSpec::Cylinder { prefix: vec![0; m] };
        let y = Point::Code(SymbolCode::zero());
        let profile = first_return_times(&System::Odometer, &ball, &y, 16, 1 << 12).unwrap();
        let mu = ball.measure(&System::Odometer).unwrap();
        let report = ergodic_ratio_check(&profile, &mu, 0.01).unwrap();
        assert_eq!(report.ratio, rat(1, 8));
        assert_eq!(report.relative_gap, 0.0);
        assert!(!report.flagged);
    }

    #[test]
    fn ergodic_ratio_needs_ten_returns() {
        let profile = InducedProfile {
            base_point: Point::Code(SymbolCode::zero()),
            return_times: vec![2, 4, 6],
        };
        assert!(matches!(
            ergodic_ratio_check(&profile, &rat(1, 2), 0.1),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn full_space_every_time_is_a_return() {
        let ball = BallSpec::Cylinder { prefix: vec![] };
        let y = Point::Code(SymbolCode::zero());
        let profile = first_return_times(&System::Odometer, &ball, &y, 12, 100).unwrap();
        let expect: Vec<u64> = (1..=12).collect();
        assert_eq!(profile.return_times, expect);
        let report = ergodic_ratio_check(&profile, &rat(1, 1), 0.01).unwrap();
        assert_eq!(report.ratio, rat(1, 1));
    }

    #[test]
    fn pigeonhole_on_cylinders_is_exactly_2_to_m() {
        for m in 0..=8usize {
            let n = pigeonhole_return(&System::Odometer, &CylinderSpec::Prefix(vec![0; m])).unwrap();
            assert_eq!(n, 1u64 << m);
            // the guaranteed cap
            assert!(n <= 1 + (1u64 << m));
        }
    }

    #[test]
    fn pigeonhole_full_space_is_one() {
        assert_eq!(
            pigeonhole_return(&System::Odometer, &CylinderSpec::Prefix(vec![])).unwrap(),
            1
        );
    }

    #[test]
    fn pigeonhole_golden_quarter_arc() {
        // ‖θ‖ ≈ .382, ‖2θ‖ ≈ .236 < 1/4: the first overlap is n = 2,
        // comfortably within the cap 1 + 1/u = 5
        let sys = System::Rotation(Angle::golden());
        let spec = CylinderSpec::Arc { a: rat(0, 1), b: rat(1, 4) };
        let n = pigeonhole_return(&sys, &spec).unwrap();
        assert_eq!(n, 2);
        assert!(n <= 5);
    }

    #[test]
    fn pigeonhole_doubling_arc() {
        let spec = CylinderSpec::Arc { a: rat(0, 1), b: rat(1, 3) };
        let n = pigeonhole_return(&System::Doubling, &spec).unwrap();
        // [0, 1/6) doubles into [0, 1/3): immediate overlap
        assert_eq!(n, 1);
        let narrow = CylinderSpec::Arc { a: rat(1, 3), b: rat(1, 3) + rat(1, 100) };
        let n = pigeonhole_return(&System::Doubling, &narrow).unwrap();
        assert!(n <= 101);
    }

    #[test]
    fn transfer_exact_structure_on_odometer() {
        // cylinder of depth m containing 0: base proxy 2/3, induced records
        // at S-times 2^j with distances 2/3^{m+j+1}, so both sides equal
        // (2/3)·3^-m exactly
        for m in [1usize, 2, 3] {
            let ball = BallSpec::Cylinder { prefix: vec![0; m] };
            let y = Point::Code(SymbolCode::zero());
            let report = induced_record_transfer(
                &System::Odometer,
                &ball,
                &y,
                &Alpha::log3_2(),
                1 << 12,
                64,
                1 << 12,
                2,
            )
            .unwrap();
            assert!((report.base_proxy - 2.0 / 3.0).abs() < 1e-12);
            assert!(report.slack.abs() < 1e-12, "slack {}", report.slack);
        }
    }

    #[test]
    fn transfer_full_space_is_equality() {
        let ball = BallSpec::Cylinder { prefix: vec![] };
        let y = Point::Code(SymbolCode::zero());
        let report = induced_record_transfer(
            &System::Odometer,
            &ball,
            &y,
            &Alpha::log3_2(),
            1 << 10,
            1 << 10,
            1 << 10,
            3,
        )
        .unwrap();
        // S = T: lhs = rhs exactly
        assert!((report.lhs - report.rhs).abs() < 1e-12);
        assert_eq!(report.mu_b, rat(1, 1));
    }

    #[test]
    fn kac_mean_return_time_exact() {
        // ν-uniform samples in a depth-m cylinder all return in exactly 2^m
        for m in [2usize, 4, 6] {
            let prefix = vec![1, 0]
                .into_iter()
                .cycle()
                .take(m)
                .collect::<Vec<u8>>();
            let ball = BallSpec::Cylinder { prefix: prefix.clone() };
            let mut total = 0u64;
            let samples = 20u64;
            for s in 0..samples {
                let code = random_code_in_cylinder(&prefix, m + 20, s).unwrap();
                let y = Point::Code(code);
                let profile =
                    first_return_times(&System::Odometer, &ball, &y, 1, 1 << 12).unwrap();
                total += profile.return_times[0];
            }
            assert_eq!(total, samples << m, "Kac mean at depth {m}");
        }
    }

    #[test]
    fn no_skipped_returns() {
        // between consecutive return times no iterate lies in the ball
        let prefix = vec![0u8, 1];
        let ball = BallSpec::Cylinder { prefix: prefix.clone() };
        let code: SymbolCode = "011010(0)".parse().unwrap();
        let y = Point::Code(code.clone());
        let profile = first_return_times(&System::Odometer, &ball, &y, 8, 1 << 10).unwrap();
        let mut cur = code;
        let mut idx = 0usize;
        for n in 1..=*profile.return_times.last().unwrap() {
            cur = odometer_step(&cur);
            let inside = code_has_prefix(&cur, &prefix);
            if profile.return_times.get(idx) == Some(&n) {
                assert!(inside);
                idx += 1;
            } else {
                assert!(!inside, "skipped return at n = {n}");
            }
        }
    }

    #[test]
    fn base_records_below_diameter_occur_at_return_times() {
        // closest returns with d < diam(B) = 3^-m happen at return times
        let m = 3usize;
        let prefix = vec![0u8; m];
        let ball = BallSpec::Cylinder { prefix: prefix.clone() };
        let code = random_code_in_cylinder(&prefix, 24, 11).unwrap();
        let y = Point::Code(code);
        let profile = first_return_times(&System::Odometer, &ball, &y, 200, 1 << 14).unwrap();
        let base = scan_records(&System::Odometer, &y, 1 << 10).unwrap();
        let diam = BigRational::new(BigInt::one(), crate::numeric::pow3(m as u64));
        for ReturnRecord { n, distance } in &base.records {
            if *distance.upper() < diam {
                assert!(
                    profile.return_times.contains(n),
                    "record at {n} below diameter is not a return time"
                );
            }
        }
    }
}
