//! From recurrence proxies to the headline outputs: per-point density lower
//! bounds and a Monte Carlo lower bound on the Hausdorff measure.
//!
//! The chain is: a positive lower bound `c` on `liminf n^{1/α} d(Tⁿx, x)`
//! forces the `α`-density `g(x) = limsup_{r→0} H_α(B(x,r))/μ(B(x,r))` to be
//! at least `c^α`. Averaging the per-point bounds over μ-sampled points then
//! bounds `H_α = ∫ g dμ` from below — for the Cantor measure the sampled
//! cylinder endpoints carry equal mass, so the equal-weight mean is the
//! exact Monte Carlo estimator.
//!
//! [`boshernitzan_classify`] reports which recurrence regime a profile is
//! consistent with (scaled record terms diverging, staying bounded, or
//! vanishing); it is a trend heuristic on the scanned window and never
//! claims a theorem.

use num_rational::BigRational;
use std::fmt;

use crate::numeric::{ln_rational, Alpha};
use crate::recurrence::{liminf_proxy, RecurrenceProfile};
use crate::{Error, Result};

/// Per-point lower bound on the `α`-density `g(x)`.
#[derive(Debug, Clone)]
pub struct DensityBound {
    /// Label of the sampled point (code text, coordinate, or sample tag).
    pub point: String,
    pub alpha: f64,
    /// The finite-horizon liminf proxy this bound came from.
    pub proxy: f64,
    /// Exact proxy value when the tail terms were exactly rational.
    pub proxy_exact: Option<BigRational>,
    /// `proxy^alpha`.
    pub g_lower: f64,
    /// Always true: the proxy is a finite-horizon minimum, so `g_lower`
    /// carries the horizon caveat (see
    /// [`crate::recurrence::PROXY_BIAS_NOTE`]).
    pub finite_horizon: bool,
    pub horizon: u64,
    pub tail_start: usize,
}

/// Converts a profile's liminf proxy into the density bound `g(x) ≥ proxy^α`.
pub fn density_lower_bound(
    profile: &RecurrenceProfile,
    alpha: &Alpha,
    tail_start: usize,
) -> Result<DensityBound> {
    let proxy = liminf_proxy(profile, alpha, tail_start)?;
    let a = alpha.as_f64();
    let g_lower = if proxy.value == 0.0 {
        0.0
    } else {
        // log-domain evaluation, from the exact proxy when it exists
        let ln_proxy = match &proxy.exact {
            Some(r) => ln_rational(r),
            None => proxy.value.ln(),
        };
        (a * ln_proxy).exp()
    };
    Ok(DensityBound {
        point: profile.point.label(),
        alpha: a,
        proxy: proxy.value,
        proxy_exact: proxy.exact,
        g_lower,
        finite_horizon: true,
        horizon: profile.horizon,
        tail_start,
    })
}

/// The assembled `H_α` lower bound: an equal-weight mean of per-point
/// density bounds over μ-i.i.d. sample points.
#[derive(Debug, Clone)]
pub struct HausdorffBound {
    pub alpha: f64,
    pub sample_count: usize,
    pub per_point: Vec<DensityBound>,
    /// Mean of the `g_lower` values — the Monte Carlo lower-bound estimate
    /// of `∫ g dμ = H_α`.
    pub h_lower: f64,
    pub horizon: u64,
    pub tail_start: usize,
}

/// Averages per-point bounds (all with the same `α`, equal μ-weights) into
/// the measure bound.
pub fn measure_lower_bound(bounds: Vec<DensityBound>) -> Result<HausdorffBound> {
    if bounds.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one density bound".into(),
        ));
    }
    let alpha = bounds[0].alpha;
    if bounds.iter().any(|b| b.alpha != alpha) {
        return Err(Error::InvalidArgument(
            "density bounds mix different alpha values".into(),
        ));
    }
    let horizon = bounds[0].horizon;
    let tail_start = bounds[0].tail_start;
    let h_lower = bounds.iter().map(|b| b.g_lower).sum::<f64>() / bounds.len() as f64;
    Ok(HausdorffBound {
        alpha,
        sample_count: bounds.len(),
        h_lower,
        horizon,
        tail_start,
        per_point: bounds,
    })
}

/// Recurrence regime of a profile at exponent `β`, read off the trend of
/// the scaled record terms `n_k^{1/β} d_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendClass {
    /// Terms grow along the tail — consistent with `H_β = ∞` (so `dim ≥ β`).
    Diverges,
    /// Terms stay bounded away from 0 and ∞ — consistent with `H_β < ∞`.
    Finite,
    /// Terms trend to 0 — consistent with `H_β = 0`.
    Vanishes,
}

impl fmt::Display for TrendClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrendClass::Diverges => write!(f, "DIVERGES"),
            TrendClass::Finite => write!(f, "FINITE"),
            TrendClass::Vanishes => write!(f, "VANISHES"),
        }
    }
}

/// Thresholds for the trend tests; crude but deterministic, and recorded in
/// every output that uses them.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyParams {
    /// Number of trailing terms that must be strictly monotone.
    pub window: usize,
    /// The last term must differ from the extreme of all terms by this
    /// factor.
    pub ratio: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            window: 5,
            ratio: 10.0,
        }
    }
}

/// Classifies the scaled record terms `n_k^{1/β} d_k`:
///
/// - `Diverges` when the last `window` terms strictly increase and the final
///   term exceeds `ratio` times the minimum term;
/// - `Vanishes` symmetrically (strictly decreasing, final term below the
///   maximum divided by `ratio`);
/// - `Finite` otherwise.
pub fn boshernitzan_classify(
    profile: &RecurrenceProfile,
    beta: &Alpha,
    params: ClassifyParams,
) -> Result<TrendClass> {
    beta.validate()?;
    if profile.records.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "classification needs >= 3 records, have {}",
            profile.records.len()
        )));
    }
    let terms: Vec<f64> = profile
        .records
        .iter()
        .map(|r| {
            if r.distance.is_zero() {
                0.0
            } else {
                (beta.scaling_log(r.n) + r.distance.ln()).exp()
            }
        })
        .collect();
    let w = params.window.max(2).min(terms.len());
    let tail = &terms[terms.len() - w..];
    let increasing = tail.windows(2).all(|p| p[1] > p[0]);
    let decreasing = tail.windows(2).all(|p| p[1] < p[0]);
    let min = terms.iter().copied().fold(f64::INFINITY, f64::min);
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let last = *terms.last().unwrap();
    if increasing && last > params.ratio * min {
        Ok(TrendClass::Diverges)
    } else if decreasing && last < max / params.ratio {
        Ok(TrendClass::Vanishes)
    } else {
        Ok(TrendClass::Finite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{pow3, rat, to_f64, Distance};
    use crate::recurrence::{scan_odometer_dyadic, scan_records, ReturnRecord};
    use crate::symbolic::SymbolCode;
    use crate::systems::{Angle, Point, System};

    fn odometer_zero_profile(horizon: u64) -> RecurrenceProfile {
        scan_records(&System::Odometer, &Point::Code(SymbolCode::zero()), horizon).unwrap()
    }

    #[test]
    fn density_bound_named_values() {
        // (2/3)^(log₃2) ≈ 0.7742813
        let profile = odometer_zero_profile(1 << 12);
        let b = density_lower_bound(&profile, &Alpha::log3_2(), 3).unwrap();
        assert_eq!(b.proxy_exact, Some(rat(2, 3)));
        assert!((b.g_lower - 0.7742813263151215).abs() < 1e-12, "{}", b.g_lower);
        assert!(b.finite_horizon);
    }

    #[test]
    fn density_bound_four_ninths() {
        // proxy 4/9 at α = log₃2 gives g ≈ 0.5995116, the ≈0.6 of the
        // Cantor-measure estimate; built from a synthetic profile whose
        // scaled tail terms are all 4/9
        let mut profile = odometer_zero_profile(16);
        profile.records = (0..6u32)
            .map(|k| ReturnRecord {
                n: 1 << k,
                distance: Distance::Exact(BigRational::new(4.into(), pow3(k as u64 + 2))),
            })
            .collect();
        let b = density_lower_bound(&profile, &Alpha::log3_2(), 0).unwrap();
        assert_eq!(b.proxy_exact, Some(rat(4, 9)));
        assert!((b.g_lower - 0.5995115722803036).abs() < 1e-12, "{}", b.g_lower);
    }

    #[test]
    fn density_bound_zero_proxy() {
        let half = System::Rotation(Angle::Rational(rat(1, 2)));
        let profile = scan_records(&half, &Point::Circle(rat(0, 1)), 4).unwrap();
        let b = density_lower_bound(&profile, &Alpha::Value(1.0), 0).unwrap();
        assert_eq!(b.proxy, 0.0);
        assert_eq!(b.g_lower, 0.0);
    }

    #[test]
    fn measure_bound_mean_and_errors() {
        let profile = odometer_zero_profile(256);
        let b = density_lower_bound(&profile, &Alpha::log3_2(), 2).unwrap();
        let single = measure_lower_bound(vec![b.clone()]).unwrap();
        assert!((single.h_lower - b.g_lower).abs() < 1e-15);
        assert_eq!(single.sample_count, 1);

        // order independence, and the mean stays inside [min, max]
        let mut b2 = b.clone();
        b2.g_lower = 0.9;
        let fwd = measure_lower_bound(vec![b.clone(), b2.clone()]).unwrap();
        let rev = measure_lower_bound(vec![b2.clone(), b.clone()]).unwrap();
        assert_eq!(fwd.h_lower, rev.h_lower);
        assert!(fwd.h_lower >= b.g_lower && fwd.h_lower <= b2.g_lower);

        assert!(measure_lower_bound(vec![]).is_err());
        let mut other_alpha = b.clone();
        other_alpha.alpha = 1.0;
        assert!(measure_lower_bound(vec![b, other_alpha]).is_err());
    }

    #[test]
    fn monotone_in_proxy() {
        // larger proxy ⇒ larger g_lower at fixed α
        let profile = odometer_zero_profile(1 << 10);
        let g1 = density_lower_bound(&profile, &Alpha::log3_2(), 1).unwrap();
        let mut shrunk = profile.clone();
        for r in shrunk.records.iter_mut() {
            if let Distance::Exact(d) = &mut r.distance {
                *d /= BigRational::from_integer(2.into());
            }
        }
        let g2 = density_lower_bound(&shrunk, &Alpha::log3_2(), 1).unwrap();
        assert!(g2.proxy < g1.proxy);
        assert!(g2.g_lower < g1.g_lower);
    }

    #[test]
    fn classify_odometer_regimes() {
        // the deep dyadic probe gives the records of the point 0 cheaply
        let records = scan_odometer_dyadic(&SymbolCode::zero(), 26);
        let profile = RecurrenceProfile {
            system: System::Odometer,
            point: Point::Code(SymbolCode::zero()),
            horizon: 1 << 26,
            records,
            periodic: false,
        };
        // β below log₃2: scaled terms (2/3)·(2^{1/β}/3)^k grow
        assert_eq!(
            boshernitzan_classify(&profile, &Alpha::Value(0.5), ClassifyParams::default()).unwrap(),
            TrendClass::Diverges
        );
        // β = log₃2 exactly: constant 2/3
        assert_eq!(
            boshernitzan_classify(&profile, &Alpha::log3_2(), ClassifyParams::default()).unwrap(),
            TrendClass::Finite
        );
        // β above log₃2: ratio 2^{1/β}/3 < 1, terms shrink geometrically
        assert_eq!(
            boshernitzan_classify(&profile, &Alpha::Value(0.7), ClassifyParams::default()).unwrap(),
            TrendClass::Vanishes
        );
    }

    #[test]
    fn classify_needs_three_records() {
        let profile = odometer_zero_profile(2);
        assert!(matches!(
            boshernitzan_classify(&profile, &Alpha::Value(1.0), ClassifyParams::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn exact_proxy_survives_to_f64() {
        let profile = odometer_zero_profile(64);
        let b = density_lower_bound(&profile, &Alpha::log3_2(), 0).unwrap();
        assert!((b.proxy - to_f64(&rat(2, 3))).abs() < 1e-15);
    }
}
