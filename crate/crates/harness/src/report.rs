use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One evaluated instance. `violation` is signed: negative means margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub violation: f64,
}

impl SampleRecord {
    /// Inequality `lhs ≤ rhs`.
    pub fn le(sample: usize, lhs: f64, rhs: f64) -> Self {
        Self {
            sample,
            lhs,
            rhs,
            violation: lhs - rhs,
        }
    }

    /// Identity `lhs = rhs`.
    pub fn eq(sample: usize, lhs: f64, rhs: f64) -> Self {
        Self {
            sample,
            lhs,
            rhs,
            violation: (lhs - rhs).abs(),
        }
    }

    /// The record of several that is closest to failing.
    pub fn worst(records: impl IntoIterator<Item = SampleRecord>) -> SampleRecord {
        records
            .into_iter()
            .reduce(|a, b| if b.violation > a.violation { b } else { a })
            .expect("at least one record")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub seed: u64,
    pub samples: usize,
    pub max_violation: f64,
    pub slack: f64,
    pub pass: bool,
    /// Wall-clock time; left out of serialized reports so they are reproducible.
    #[serde(skip)]
    pub runtime_ms: u64,
    pub details: Vec<SampleRecord>,
}

impl CheckReport {
    pub fn new(
        check_id: &str,
        seed: u64,
        slack: f64,
        details: Vec<SampleRecord>,
        runtime_ms: u64,
    ) -> Self {
        let max_violation = details
            .iter()
            .map(|d| d.violation)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            check_id: check_id.to_string(),
            seed,
            samples: details.len(),
            max_violation,
            slack,
            pass: max_violation <= slack,
            runtime_ms,
            details,
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "{:<15} {}  samples={:<5} max_violation={:+.3e} slack={:.0e} ({} ms)",
            self.check_id,
            if self.pass { "PASS" } else { "FAIL" },
            self.samples,
            self.max_violation,
            self.slack,
            self.runtime_ms
        )
    }
}

pub fn reports_to_json(reports: &[CheckReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

pub fn write_json(reports: &[CheckReport], path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(reports_to_json(reports)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

#[derive(Serialize)]
struct CsvRow<'a> {
    check_id: &'a str,
    seed: u64,
    sample: usize,
    lhs: f64,
    rhs: f64,
    violation: f64,
}

/// Flat per-sample table: `check_id, seed, sample, lhs, rhs, violation`.
pub fn reports_to_csv(reports: &[CheckReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        for d in &r.details {
            w.serialize(CsvRow {
                check_id: &r.check_id,
                seed: r.seed,
                sample: d.sample,
                lhs: d.lhs,
                rhs: d.rhs,
                violation: d.violation,
            })?;
        }
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn write_csv(reports: &[CheckReport], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, reports_to_csv(reports)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_follows_slack() {
        let d = vec![
            SampleRecord::le(0, 1.0, 2.0),
            SampleRecord::le(1, 2.0, 2.0 - 1e-9),
        ];
        let r = CheckReport::new("X", 3, 1e-7, d, 5);
        assert!(r.pass);
        assert!((r.max_violation - 1e-9).abs() < 1e-15);
        let r = CheckReport::new("X", 3, 1e-10, r.details.clone(), 5);
        assert!(!r.pass);
    }

    #[test]
    fn serialized_reports_omit_runtime() {
        let r = CheckReport::new("X", 1, 1e-7, vec![SampleRecord::eq(0, 0.5, 0.5)], 1234);
        let json = reports_to_json(std::slice::from_ref(&r)).unwrap();
        assert!(!json.contains("runtime"));
        let back: Vec<CheckReport> = serde_json::from_str(&json).unwrap();
        assert_eq!(back[0].details, r.details);
        let csv = String::from_utf8(reports_to_csv(&[r]).unwrap()).unwrap();
        assert_eq!(
            csv.lines().next().unwrap(),
            "check_id,seed,sample,lhs,rhs,violation"
        );
        assert_eq!(csv.lines().count(), 2);
    }
}
