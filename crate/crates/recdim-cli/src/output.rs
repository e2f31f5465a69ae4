//! Output rendering: CSV payloads, JSON documents, and delivery to stdout
//! or files (with a `.meta.json` sidecar for CSV outputs).

use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

use recdim::numeric::Distance;
use recdim::recurrence::ReturnRecord;
use recdim::BigRational;

/// A finished command: the data payload plus the effective-configuration
/// metadata. JSON payloads embed the metadata themselves; CSV payloads get
/// it as a sidecar (file mode) or on stderr (stdout mode).
#[derive(Debug)]
pub struct CommandOutput {
    pub payload: String,
    pub sidecar: Option<Value>,
    pub out: Option<PathBuf>,
}

impl CommandOutput {
    pub fn deliver(&self) -> std::io::Result<()> {
        match &self.out {
            Some(path) => {
                std::fs::write(path, &self.payload)?;
                if let Some(meta) = &self.sidecar {
                    let meta_path = sidecar_path(path);
                    std::fs::write(meta_path, format!("{:#}\n", meta))?;
                }
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(self.payload.as_bytes())?;
                if let Some(meta) = &self.sidecar {
                    eprintln!("{meta}");
                }
            }
        }
        Ok(())
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Denominators beyond this many bits render as certified decimals instead
/// of exact columns (deep doubling-map points produce exact distances whose
/// reduced denominators run to millions of digits).
const EXACT_RENDER_BIT_LIMIT: u64 = 1024;

fn renders_exact(records: &[ReturnRecord]) -> bool {
    records.iter().all(|r| match &r.distance {
        Distance::Exact(d) => d.denom().magnitude().bits() <= EXACT_RENDER_BIT_LIMIT,
        Distance::Certified { .. } => false,
    })
}

/// A valid error bound for printing an exact distance as a decimal: the f64
/// conversion is within 2 ulp, bounded by `|d| * 2^-50`.
fn conversion_err(d: f64) -> f64 {
    d.abs() * 2f64.powi(-50) + f64::MIN_POSITIVE
}

/// Records as CSV. Exact distances use separate numerator/denominator
/// columns (`n,d_num,d_den`); certified distances — or exact ones whose
/// denominators exceed [`EXACT_RENDER_BIT_LIMIT`] bits — use a decimal value
/// with its error bound (`n,d,err`). The header row is always present and
/// one form is used for the whole file.
pub fn records_csv(records: &[ReturnRecord]) -> String {
    let mut out = String::new();
    if renders_exact(records) {
        out.push_str("n,d_num,d_den\n");
        for r in records {
            if let Distance::Exact(d) = &r.distance {
                out.push_str(&format!("{},{},{}\n", r.n, d.numer(), d.denom()));
            }
        }
    } else {
        out.push_str("n,d,err\n");
        for r in records {
            let (d, err) = match &r.distance {
                Distance::Exact(_) => {
                    let d = r.distance.to_f64();
                    (d, conversion_err(d))
                }
                Distance::Certified { .. } => (r.distance.to_f64(), r.distance.error_bound()),
            };
            out.push_str(&format!("{},{},{}\n", r.n, fmt_f64(d), fmt_f64(err)));
        }
    }
    out
}

/// Records as a JSON array (for `--format json`), same rendering rule as the
/// CSV form.
pub fn records_json(records: &[ReturnRecord]) -> Value {
    let exact = renders_exact(records);
    Value::Array(
        records
            .iter()
            .map(|r| match &r.distance {
                Distance::Exact(d) if exact => json!({
                    "n": r.n,
                    "d_num": d.numer().to_string(),
                    "d_den": d.denom().to_string(),
                }),
                Distance::Exact(_) => {
                    let d = r.distance.to_f64();
                    json!({ "n": r.n, "d": d, "err": conversion_err(d) })
                }
                Distance::Certified { .. } => json!({
                    "n": r.n,
                    "d": r.distance.to_f64(),
                    "err": r.distance.error_bound(),
                }),
            })
            .collect(),
    )
}

/// Induced-profile CSV: `k,n_k,ratio` rows.
pub fn induced_csv(return_times: &[u64]) -> String {
    let mut out = String::from("k,n_k,ratio\n");
    for (i, &n) in return_times.iter().enumerate() {
        let k = i as u64 + 1;
        out.push_str(&format!("{k},{n},{}\n", fmt_f64(k as f64 / n as f64)));
    }
    out
}

/// Correlation CSV: `lag,value,stderr` rows.
pub fn corr_csv(lags: &[u64], values: &[f64], stderr: &[f64]) -> String {
    let mut out = String::from("lag,value,stderr\n");
    for ((l, v), e) in lags.iter().zip(values).zip(stderr) {
        out.push_str(&format!("{l},{},{}\n", fmt_f64(*v), fmt_f64(*e)));
    }
    out
}

/// Shortest round-trip decimal for a float; stable across runs.
pub fn fmt_f64(v: f64) -> String {
    let mut buf = ryu_like(v);
    if !buf.contains('.') && !buf.contains('e') && !buf.contains("inf") && !buf.contains("NaN") {
        buf.push_str(".0");
    }
    buf
}

fn ryu_like(v: f64) -> String {
    // `{}` on f64 is already the shortest representation that round-trips
    format!("{v}")
}

pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn opt_rational_string(r: &Option<BigRational>) -> Value {
    match r {
        Some(r) => Value::String(rational_string(r)),
        None => Value::Null,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use recdim::numeric::Distance;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_records_csv() {
        let recs = vec![
            ReturnRecord { n: 1, distance: Distance::Exact(rat(2, 3)) },
            ReturnRecord { n: 2, distance: Distance::Exact(rat(2, 9)) },
        ];
        assert_eq!(records_csv(&recs), "n,d_num,d_den\n1,2,3\n2,2,9\n");
    }

    #[test]
    fn certified_records_csv_has_err_column() {
        let recs = vec![ReturnRecord {
            n: 3,
            distance: Distance::certified(rat(1, 4), rat(1, 2)),
        }];
        let csv = records_csv(&recs);
        assert!(csv.starts_with("n,d,err\n"));
        assert!(csv.contains("3,0.375,0.125"));
    }

    #[test]
    fn induced_rows() {
        let csv = induced_csv(&[4, 8, 12]);
        assert_eq!(csv, "k,n_k,ratio\n1,4,0.25\n2,8,0.25\n3,12,0.25\n");
    }

    #[test]
    fn sidecar_path_appends() {
        assert_eq!(
            sidecar_path(Path::new("out/records.csv")),
            PathBuf::from("out/records.csv.meta.json")
        );
    }
}
