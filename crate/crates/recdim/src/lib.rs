//! Lower bounds on Hausdorff measure and dimension from closest-return times.
//!
//! A measure-preserving map `T` on a metric space recurs: almost every orbit
//! comes back arbitrarily close to its starting point. *How fast* it comes
//! back is governed by the Hausdorff measure of the space. Quantitatively,
//! for any `α > 0` and almost every `x`,
//!
//! ```text
//! liminf_{n → ∞}  n^{1/α} · d(Tⁿx, x)  ≤  g(x)^{1/α},
//! ```
//!
//! where `g(x)` is the `α`-dimensional density `limsup_{r→0} H_α(B(x,r)) / μ(B(x,r))`.
//! Read backwards: a *positive* lower bound on the left-hand side is a lower
//! bound on `g(x)`, and averaging `g` over `μ` bounds `H_α` itself from below.
//!
//! This crate makes the left-hand side computable. It scans orbits for their
//! *closest returns* — the iterates `n` whose distance `d(Tⁿx, x)` beats every
//! earlier iterate — entirely in exact (or certified-interval) arithmetic, and
//! converts the resulting record sequence into dimension and measure bounds.
//!
//! The workhorse example is the middle-thirds Cantor set with the adding
//! machine (odometer) acting on binary codings. There everything is an exact
//! rational: the orbit of `0` has closest returns at `n = 2^k` with distances
//! `2/3^{k+1}`, which yields `HD(C) ≥ log₃2` and `H_{log₃2}(C) ≳ 0.599`.
//! Circle rotations (with continued-fraction angles) and the doubling map are
//! provided as the slowly- and rapidly-mixing comparison systems.
//!
//! Module map:
//!
//! - [`symbolic`] — binary codings of Cantor-set points, exact values and distances
//! - [`systems`] — the three dynamical systems behind one interface
//! - [`recurrence`] — record scanning, liminf proxies, recurrence exponents
//! - [`bounds`] — density lower bounds, Monte Carlo Hausdorff-measure bound,
//!   divergence classification
//! - [`induced`] — first-return (induced) maps: return times, Kac/ergodic-ratio
//!   checks, pigeonhole return bound, record transfer
//! - [`mixing`] — empirical correlation decay and the `(n ln ln n)^{1/α}` diagnostic
//! - [`oracles`] — independent closed-form and brute-force reference
//!   implementations used to validate everything else

pub mod bounds;
pub mod induced;
pub mod mixing;
pub mod numeric;
pub mod oracles;
pub mod recurrence;
pub mod symbolic;
pub mod systems;

pub use numeric::{Alpha, Distance};
pub use symbolic::SymbolCode;
pub use systems::{Angle, CylinderSpec, Point, System};

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A spec string (code, system, point, angle, …) could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// Interval arithmetic could not certify a comparison even at the
    /// precision cap; `n` is the iterate at which certification failed.
    #[error("precision failure at n = {n}: {detail}")]
    PrecisionFailure { n: u64, detail: String },
    /// Not enough records/returns/values to compute the requested quantity.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// A zero-distance return was found where the operation requires none.
    #[error("periodic point: d(T^{n}(x), x) = 0")]
    PeriodicPoint { n: u64 },
    /// An iteration budget ran out before the requested count was reached.
    #[error("iteration budget exhausted after {iterations} iterations ({returns_found} returns found)")]
    BudgetExceeded {
        iterations: u64,
        returns_found: usize,
    },
    /// An internal invariant failed. Always a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
