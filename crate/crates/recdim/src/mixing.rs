//! Empirical correlation decay and the `(n ln ln n)^{1/α}` diagnostic.
//!
//! Rapid mixing kills the recurrence method: under an exponential decay of
//! correlations `|μ(f∘Tⁿ·g) − μ(f)μ(g)| ≤ C γⁿ ‖g‖ μ(|f|)` the liminf of
//! `(n ln ln n)^{1/α} d(Tⁿx, x)` is zero, so no positive density bound can
//! come out of it. The tools here confirm the choice of map empirically:
//! the odometer's correlations do not decay at all (slow mixing, good),
//! while the doubling map's decay at rate `γ ≈ 1/2` (fast mixing, the
//! contrast case).
//!
//! Correlations are Monte Carlo estimates over a fixed μ-sample — except on
//! the odometer with digit functions, where expectations over depth-`L`
//! cylinders are finite sums and the values come out exactly rational.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

use crate::numeric::{to_f64, Alpha};
use crate::recurrence::RecurrenceProfile;
use crate::symbolic::{random_digits, SymbolCode};
use crate::systems::{odometer_power, Angle, System};
use crate::{Error, Result};

/// The fixed catalog of test observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// `x − 1/2` (id `xc`).
    CenteredCoordinate,
    /// First coding/binary digit as `±1/2` (id `d1`).
    FirstDigit,
    /// `cos(2πx)` (id `cos`).
    Cosine,
}

impl TestFunction {
    /// Number of leading digits the function depends on, when finite.
    fn digit_depth(&self) -> Option<usize> {
        match self {
            TestFunction::FirstDigit => Some(1),
            _ => None,
        }
    }

    fn eval_unit(&self, x: f64) -> f64 {
        match self {
            TestFunction::CenteredCoordinate => x - 0.5,
            TestFunction::FirstDigit => {
                if x >= 0.5 {
                    0.5
                } else {
                    -0.5
                }
            }
            TestFunction::Cosine => (2.0 * std::f64::consts::PI * x).cos(),
        }
    }

    fn eval_code(&self, code: &SymbolCode) -> f64 {
        match self {
            TestFunction::FirstDigit => code.digit(0) as f64 - 0.5,
            TestFunction::CenteredCoordinate => to_f64(&code.value()) - 0.5,
            TestFunction::Cosine => {
                (2.0 * std::f64::consts::PI * to_f64(&code.value())).cos()
            }
        }
    }

    /// Exact value on a cylinder word, for functions of finitely many digits.
    fn exact_on_word(&self, word: u64) -> BigRational {
        match self {
            TestFunction::FirstDigit => {
                if word & 1 == 1 {
                    BigRational::new(BigInt::from(1), BigInt::from(2))
                } else {
                    BigRational::new(BigInt::from(-1), BigInt::from(2))
                }
            }
            _ => unreachable!("only digit functions are evaluated exactly"),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::CenteredCoordinate => write!(f, "xc"),
            TestFunction::FirstDigit => write!(f, "d1"),
            TestFunction::Cosine => write!(f, "cos"),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xc" => Ok(TestFunction::CenteredCoordinate),
            "d1" => Ok(TestFunction::FirstDigit),
            "cos" => Ok(TestFunction::Cosine),
            other => Err(Error::InvalidArgument(format!(
                "unknown test function '{other}' (catalog: xc, d1, cos)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    MonteCarlo,
    /// Exact expectation over depth-`L` cylinders (odometer digit functions).
    ExhaustiveCylinders,
}

/// Correlation magnitudes `|Ĉ_n|` over a list of lags, from one shared
/// sample set.
#[derive(Debug, Clone)]
pub struct CorrelationSeries {
    pub lags: Vec<u64>,
    /// `|Ĉ_n|` per lag.
    pub values: Vec<f64>,
    /// Standard error of the product term per lag (0 for exact values).
    pub stderr: Vec<f64>,
    /// Signed exact correlations, when computed exhaustively.
    pub exact: Option<Vec<BigRational>>,
    pub method: EstimateMethod,
    pub samples: u64,
    pub seed: u64,
    pub f: TestFunction,
    pub g: TestFunction,
}

/// Estimates `Ĉ_n = mean(f∘Tⁿ · g) − mean(f)·mean(g)` for each lag, over `m`
/// μ-sampled points (deterministic in `seed`), or exactly over cylinders
/// when both functions depend on finitely many odometer digits.
pub fn correlation_estimate(
    system: &System,
    f: TestFunction,
    g: TestFunction,
    lags: &[u64],
    m: usize,
    seed: u64,
) -> Result<CorrelationSeries> {
    if lags.is_empty() {
        return Err(Error::InvalidArgument("need at least one lag".into()));
    }
    if m < 100 {
        return Err(Error::InvalidArgument(format!(
            "sample count must be >= 100, got {m}"
        )));
    }
    if *system == System::Odometer {
        if let (Some(df), Some(dg)) = (f.digit_depth(), g.digit_depth()) {
            return Ok(exhaustive_cylinder_series(f, g, df.max(dg), lags, seed));
        }
    }
    let max_lag = *lags.iter().max().unwrap();
    // per-sample values of g(x), f(x), and f(Tⁿx) per lag
    let mut sum_g = 0.0f64;
    let mut sum_f = 0.0f64;
    let mut sum_fg = vec![0.0f64; lags.len()];
    let mut sum_fg2 = vec![0.0f64; lags.len()];
    for i in 0..m {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let (gx, fx, f_lagged) = sample_orbit_values(system, &f, &g, lags, max_lag, &mut rng)?;
        sum_g += gx;
        sum_f += fx;
        for (j, flag) in f_lagged.iter().enumerate() {
            let prod = flag * gx;
            sum_fg[j] += prod;
            sum_fg2[j] += prod * prod;
        }
    }
    let mf = sum_f / m as f64;
    let mg = sum_g / m as f64;
    let mut values = Vec::with_capacity(lags.len());
    let mut stderr = Vec::with_capacity(lags.len());
    for j in 0..lags.len() {
        let mean_fg = sum_fg[j] / m as f64;
        let var = (sum_fg2[j] / m as f64 - mean_fg * mean_fg).max(0.0);
        values.push((mean_fg - mf * mg).abs());
        stderr.push((var / m as f64).sqrt());
    }
    Ok(CorrelationSeries {
        lags: lags.to_vec(),
        values,
        stderr,
        exact: None,
        method: EstimateMethod::MonteCarlo,
        samples: m as u64,
        seed,
        f,
        g,
    })
}

/// One sampled point of the system and the observable values the estimator
/// needs: `g(x)`, `f(x)`, and `f(Tⁿx)` for each lag.
fn sample_orbit_values(
    system: &System,
    f: &TestFunction,
    g: &TestFunction,
    lags: &[u64],
    max_lag: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64, Vec<f64>)> {
    match system {
        System::Odometer => {
            // enough digits that truncation (3^-depth) is far below f64 noise,
            // and that every lag's carries are covered
            let depth = 64 - max_lag.leading_zeros() as usize + 48;
            let code = SymbolCode::new(random_digits(rng, depth), vec![0])?;
            let gx = g.eval_code(&code);
            let fx = f.eval_code(&code);
            let f_lagged = lags
                .iter()
                .map(|&n| f.eval_code(&odometer_power(&code, n)))
                .collect();
            Ok((gx, fx, f_lagged))
        }
        System::Doubling => {
            let depth = max_lag as usize + 64;
            let bits = random_digits(rng, depth);
            let value_at = |offset: usize| -> f64 {
                let mut v = 0.0f64;
                let mut w = 0.5f64;
                for i in offset..(offset + 53).min(depth) {
                    if bits[i] == 1 {
                        v += w;
                    }
                    w *= 0.5;
                }
                v
            };
            let gx = g.eval_unit(value_at(0));
            let fx = f.eval_unit(value_at(0));
            let f_lagged = lags
                .iter()
                .map(|&n| f.eval_unit(value_at(n as usize)))
                .collect();
            Ok((gx, fx, f_lagged))
        }
        System::Rotation(angle) => {
            let theta = rotation_angle_f64(angle);
            let x = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            let gx = g.eval_unit(x);
            let fx = f.eval_unit(x);
            let f_lagged = lags
                .iter()
                .map(|&n| f.eval_unit((x + n as f64 * theta).fract()))
                .collect();
            Ok((gx, fx, f_lagged))
        }
    }
}

fn rotation_angle_f64(angle: &Angle) -> f64 {
    let ta = angle.theta_approx(128);
    to_f64(&BigRational::new(
        BigInt::from(ta.num.clone()),
        BigInt::from(ta.denom.clone()),
    ))
}

/// Exact correlations for digit functions: expectations are finite sums over
/// the `2^L` depth-`L` cylinders, each of Cantor measure `2^-L`, and the
/// first `L` digits of `x + n` depend only on the first `L` digits of `x`.
fn exhaustive_cylinder_series(
    f: TestFunction,
    g: TestFunction,
    depth: usize,
    lags: &[u64],
    seed: u64,
) -> CorrelationSeries {
    let size = 1u64 << depth;
    let mask = size - 1;
    let weight = BigRational::new(BigInt::from(1), BigInt::from(size));
    let mut e_f = BigRational::zero();
    let mut e_g = BigRational::zero();
    for w in 0..size {
        e_f += &weight * f.exact_on_word(w);
        e_g += &weight * g.exact_on_word(w);
    }
    let mut exact = Vec::with_capacity(lags.len());
    for &n in lags {
        let mut e_fg = BigRational::zero();
        for w in 0..size {
            let shifted = (w + n) & mask;
            e_fg += &weight * f.exact_on_word(shifted) * g.exact_on_word(w);
        }
        exact.push(e_fg - &e_f * &e_g);
    }
    let values = exact.iter().map(|c| to_f64(c).abs()).collect();
    CorrelationSeries {
        lags: lags.to_vec(),
        values,
        stderr: vec![0.0; lags.len()],
        exact: Some(exact),
        method: EstimateMethod::ExhaustiveCylinders,
        samples: size,
        seed,
        f,
        g,
    }
}

/// Least-squares fit of `ln|Ĉ_n| = ln C + n ln γ` over a lag window.
#[derive(Debug, Clone)]
pub struct DecayFit {
    pub gamma: f64,
    pub c: f64,
    pub window: (u64, u64),
    /// RMS of the log-residuals.
    pub residual: f64,
    pub points_used: usize,
}

pub fn fit_decay(series: &CorrelationSeries, window: Option<(u64, u64)>) -> Result<DecayFit> {
    let (w_lo, w_hi) = window.unwrap_or((
        *series.lags.iter().min().unwrap(),
        *series.lags.iter().max().unwrap(),
    ));
    let pts: Vec<(f64, f64)> = series
        .lags
        .iter()
        .zip(&series.values)
        .filter(|(&n, &v)| n >= w_lo && n <= w_hi && v > 0.0)
        .map(|(&n, &v)| (n as f64, v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs >= 3 positive values in the window, have {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residual = (pts
        .iter()
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        gamma: slope.exp(),
        c: intercept.exp(),
        window: (w_lo, w_hi),
        residual,
        points_used: pts.len(),
    })
}

/// Term sequence and tail minimum of `(n ln ln n)^{1/α} · d(Tⁿx, x)` over
/// the records with `n ≥ 3`.
///
/// Under exponential mixing this diagnostic trends to zero along records;
/// for the odometer it diverges — the sign that the map is slow-mixing
/// enough for the recurrence method to produce positive bounds.
#[derive(Debug, Clone)]
pub struct LogLogDiagnostic {
    pub times: Vec<u64>,
    pub terms: Vec<f64>,
    pub tail_min: f64,
    /// Records dropped because `ln ln n` is undefined or nonpositive there.
    pub excluded_small_n: usize,
}

pub fn loglog_diagnostic(profile: &RecurrenceProfile, alpha: &Alpha) -> Result<LogLogDiagnostic> {
    alpha.validate()?;
    let mut times = Vec::new();
    let mut terms = Vec::new();
    let mut excluded = 0usize;
    for r in &profile.records {
        if r.n < 3 {
            excluded += 1;
            continue;
        }
        let loglog = (r.n as f64).ln().ln();
        let term = if r.distance.is_zero() {
            0.0
        } else {
            ((((r.n as f64) * loglog).ln()) / alpha.as_f64() + r.distance.ln()).exp()
        };
        times.push(r.n);
        terms.push(term);
    }
    if terms.is_empty() {
        return Err(Error::InsufficientData(
            "no records with n >= 3 (ln ln n undefined below)".into(),
        ));
    }
    let tail_min = terms.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(LogLogDiagnostic {
        times,
        terms,
        tail_min,
        excluded_small_n: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use crate::recurrence::scan_records;
    use crate::systems::Point;

    #[test]
    fn odometer_first_digit_correlation_is_exact_quarter() {
        let lags: Vec<u64> = (0..=8).collect();
        let series = correlation_estimate(
            &System::Odometer,
            TestFunction::FirstDigit,
            TestFunction::FirstDigit,
            &lags,
            100,
            0,
        )
        .unwrap();
        assert_eq!(series.method, EstimateMethod::ExhaustiveCylinders);
        let exact = series.exact.as_ref().unwrap();
        for (j, &n) in lags.iter().enumerate() {
            // the first digit toggles every step: +1/4 at even lags,
            // −1/4 at odd lags, |Ĉ| = 1/4 always — no decay
            let expect = if n % 2 == 0 { rat(1, 4) } else { rat(-1, 4) };
            assert_eq!(exact[j], expect, "lag {n}");
            assert_eq!(series.values[j], 0.25);
            assert_eq!(series.stderr[j], 0.0);
        }
    }

    #[test]
    fn identity_map_correlation_is_variance() {
        // rotation by 0: no dynamics, Ĉ_n = Var(x - 1/2) ≈ 1/12
        let sys: System = "rotation:frac=0/1".parse().unwrap();
        let lags = [1u64, 2, 5];
        let series = correlation_estimate(
            &sys,
            TestFunction::CenteredCoordinate,
            TestFunction::CenteredCoordinate,
            &lags,
            4000,
            42,
        )
        .unwrap();
        for v in &series.values {
            assert!((v - 1.0 / 12.0).abs() < 0.01, "value {v}");
        }
    }

    #[test]
    fn doubling_covariance_halves_per_lag() {
        // Cov((2ⁿx mod 1) − 1/2, x − 1/2) = 2^-n / 12
        let lags = [1u64, 2, 3, 4];
        let series = correlation_estimate(
            &System::Doubling,
            TestFunction::CenteredCoordinate,
            TestFunction::CenteredCoordinate,
            &lags,
            40_000,
            7,
        )
        .unwrap();
        for (j, &n) in lags.iter().enumerate() {
            let expect = 0.5f64.powi(n as i32) / 12.0;
            assert!(
                (series.values[j] - expect).abs() < 4.0 * series.stderr[j] + 1e-4,
                "lag {n}: {} vs {expect}",
                series.values[j]
            );
        }
    }

    #[test]
    fn estimates_are_deterministic_in_seed() {
        let lags = [1u64, 3];
        let a = correlation_estimate(
            &System::Doubling,
            TestFunction::CenteredCoordinate,
            TestFunction::Cosine,
            &lags,
            500,
            9,
        )
        .unwrap();
        let b = correlation_estimate(
            &System::Doubling,
            TestFunction::CenteredCoordinate,
            TestFunction::Cosine,
            &lags,
            500,
            9,
        )
        .unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.stderr, b.stderr);
    }

    #[test]
    fn input_validation() {
        assert!(correlation_estimate(
            &System::Doubling,
            TestFunction::CenteredCoordinate,
            TestFunction::CenteredCoordinate,
            &[],
            100,
            0
        )
        .is_err());
        assert!(correlation_estimate(
            &System::Doubling,
            TestFunction::CenteredCoordinate,
            TestFunction::CenteredCoordinate,
            &[1],
            5,
            0
        )
        .is_err());
        assert!("sin".parse::<TestFunction>().is_err());
    }

    #[test]
    fn fit_recovers_synthetic_decay() {
        let lags: Vec<u64> = (1..=10).collect();
        let series = CorrelationSeries {
            values: lags.iter().map(|&n| 0.5f64.powi(n as i32) / 12.0).collect(),
            stderr: vec![0.0; lags.len()],
            lags,
            exact: None,
            method: EstimateMethod::MonteCarlo,
            samples: 0,
            seed: 0,
            f: TestFunction::CenteredCoordinate,
            g: TestFunction::CenteredCoordinate,
        };
        let fit = fit_decay(&series, None).unwrap();
        assert!((fit.gamma - 0.5).abs() < 1e-9);
        assert!((fit.c - 1.0 / 12.0).abs() < 1e-9);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn constant_series_has_no_decay() {
        let lags: Vec<u64> = (1..=6).collect();
        let series = CorrelationSeries {
            values: vec![0.25; lags.len()],
            stderr: vec![0.0; lags.len()],
            lags,
            exact: None,
            method: EstimateMethod::MonteCarlo,
            samples: 0,
            seed: 0,
            f: TestFunction::FirstDigit,
            g: TestFunction::FirstDigit,
        };
        let fit = fit_decay(&series, None).unwrap();
        assert!((fit.gamma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_needs_three_positive_points() {
        let series = CorrelationSeries {
            lags: vec![1, 2, 3],
            values: vec![0.1, 0.0, 0.0],
            stderr: vec![0.0; 3],
            exact: None,
            method: EstimateMethod::MonteCarlo,
            samples: 0,
            seed: 0,
            f: TestFunction::CenteredCoordinate,
            g: TestFunction::CenteredCoordinate,
        };
        assert!(matches!(
            fit_decay(&series, None),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn loglog_odometer_matches_closed_form() {
        // records (2^k, 2/3^{k+1}): term_k = (2/3)·(ln(k ln 2))^{log₂3}
        let profile = scan_records(
            &System::Odometer,
            &Point::Code(SymbolCode::zero()),
            1 << 14,
        )
        .unwrap();
        let diag = loglog_diagnostic(&profile, &Alpha::log3_2()).unwrap();
        assert_eq!(diag.excluded_small_n, 2); // n = 1, 2
        for (t, term) in diag.times.iter().zip(&diag.terms) {
            let k = t.ilog2() as f64;
            let expect = (2.0 / 3.0) * (k * 2f64.ln()).ln().powf(3f64.log2());
            assert!((term - expect).abs() < 1e-12 * expect.abs().max(1.0));
        }
        // strictly increasing from k = 5 on
        let from5 = diag
            .times
            .iter()
            .position(|&t| t >= 1 << 5)
            .unwrap();
        for w in diag.terms[from5..].windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn loglog_guards_small_n() {
        let profile = scan_records(&System::Odometer, &Point::Code(SymbolCode::zero()), 2).unwrap();
        assert!(matches!(
            loglog_diagnostic(&profile, &Alpha::log3_2()),
            Err(Error::InsufficientData(_))
        ));
    }
}
