//! Effective run configuration: CLI flags override config-file values, and
//! anything still unset is filled from documented defaults. The effective
//! configuration (defaults included) is embedded in every output so a run
//! can be reproduced byte for byte.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use recdim::recurrence::DEFAULT_TAIL_START;
use recdim::{Error, Result};

/// Default scan horizon: `2^20`.
pub const DEFAULT_HORIZON: u64 = 1 << 20;
/// Default Monte Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 100;
/// Default returns collected by `induced`.
pub const DEFAULT_RETURNS: usize = 100;
/// Default lag list for `corr`.
pub const DEFAULT_LAGS: &str = "1..10";

/// Sampling depth rule for random odometer points, `⌈log₂ N⌉ + 8`: every
/// distance examined up to horizon `N` is determined by `ceil(log2 N)`
/// digits plus carries; eight guard digits cover the carries conservatively.
pub fn default_depth(horizon: u64) -> usize {
    let ceil_log2 = if horizon <= 1 {
        0
    } else {
        64 - (horizon - 1).leading_zeros() as usize
    };
    ceil_log2 + 8
}

/// Config-file schema: a JSON object whose fields mirror the CLI flags.
/// Flags override file values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub system: Option<String>,
    pub point: Option<String>,
    pub horizon: Option<u64>,
    pub k0: Option<usize>,
    pub mode: Option<String>,
    pub alpha: Option<String>,
    pub samples: Option<usize>,
    pub depth: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub lags: Option<String>,
    pub f: Option<String>,
    pub g: Option<String>,
    pub returns: Option<usize>,
    pub budget: Option<u64>,
    pub cylinder: Option<String>,
    pub center: Option<String>,
    pub radius: Option<String>,
    pub fit_window: Option<String>,
    pub classify_window: Option<usize>,
    pub classify_ratio: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {path:?}: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("invalid config file {path:?}: {e}")))
    }
}

/// `flag.or(file value)`, the merge rule used for every option.
pub fn merged<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn default_tail_start() -> usize {
    DEFAULT_TAIL_START
}

/// Parses `"a..b"` (inclusive) or a comma list `"1,2,5"` into lags.
pub fn parse_lags(spec: &str) -> Result<Vec<u64>> {
    let spec = spec.trim();
    let err = || Error::Parse(format!("invalid lag spec '{spec}', expected a..b or n,m,..."));
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| err())?;
        let b: u64 = b.trim().parse().map_err(|_| err())?;
        if b < a {
            return Err(err());
        }
        Ok((a..=b).collect())
    } else {
        spec.split(',')
            .map(|t| t.trim().parse().map_err(|_| err()))
            .collect()
    }
}

/// Parses a cylinder prefix word like `"01"` (empty string = full space).
pub fn parse_prefix(spec: &str) -> Result<Vec<u8>> {
    spec.trim()
        .bytes()
        .map(|b| match b {
            b'0' => Ok(0),
            b'1' => Ok(1),
            _ => Err(Error::Parse(format!(
                "invalid cylinder word '{spec}': digits must be 0 or 1"
            ))),
        })
        .collect()
}

/// Seed resolution: explicit seed, or a fresh one from the OS recorded in
/// the output metadata.
pub fn resolve_seed(explicit: Option<u64>) -> u64 {
    explicit.unwrap_or_else(rand::random)
}
