//! Study output: sufficient-statistic records, the summary derived from them,
//! fitted slopes, and pass/fail checks.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{RunConfig, Study};
use crate::error::{Error, Result};

/// Accumulated samples of one quantity: `count`, `Σ x`, `Σ x²`, and the raw
/// samples when a median is needed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub key: String,
    /// Level, rung, or ladder index the record belongs to.
    pub level: usize,
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<f64>,
}

impl Record {
    pub fn new(key: impl Into<String>, level: usize) -> Self {
        Record { key: key.into(), level, count: 0, sum: 0.0, sum_sq: 0.0, reference: None, samples: Vec::new() }
    }

    /// A single deterministic value.
    pub fn value(key: impl Into<String>, level: usize, x: f64) -> Self {
        let mut r = Self::new(key, level);
        r.push(x);
        r
    }

    pub fn with_reference(mut self, reference: f64) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn push_sample(&mut self, x: f64) {
        self.push(x);
        self.samples.push(x);
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let m = self.mean();
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    }

    pub fn std_err(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    pub fn median(&self) -> Option<f64> {
        if self.samples.is_empty() {
            return None;
        }
        let mut s = self.samples.clone();
        s.sort_by(f64::total_cmp);
        let m = s.len() / 2;
        Some(if s.len() % 2 == 1 { s[m] } else { 0.5 * (s[m - 1] + s[m]) })
    }

    /// Standard error of the median, `√(π/2) σ / √N` for near-normal samples.
    pub fn median_std_err(&self) -> Option<f64> {
        if self.samples.len() < 2 {
            return None;
        }
        Some((std::f64::consts::FRAC_PI_2).sqrt() * self.variance().sqrt() / (self.samples.len() as f64).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub key: String,
    pub level: usize,
    pub count: u64,
    pub mean: f64,
    pub std_err: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
}

impl From<&Record> for SummaryEntry {
    fn from(r: &Record) -> Self {
        SummaryEntry {
            key: r.key.clone(),
            level: r.level,
            count: r.count,
            mean: r.mean(),
            std_err: r.std_err(),
            median: r.median(),
            reference: r.reference,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub name: String,
    pub value: f64,
}

/// One acceptance check. `gating = false` marks diagnostics that are
/// reported but do not decide the exit status.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub gating: bool,
    pub detail: String,
}

impl Check {
    /// `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: value <= tolerance, value, tolerance, gating: true, detail: detail.into() }
    }

    pub fn holds(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            tolerance: 1.0,
            gating: true,
            detail: detail.into(),
        }
    }

    pub fn informational(mut self) -> Self {
        self.gating = false;
        self
    }
}

/// A two-column trend series for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub name: String,
    pub columns: [String; 2],
    pub points: Vec<(f64, f64)>,
}

impl Trend {
    pub fn new(name: &str, x: &str, y: &str, points: Vec<(f64, f64)>) -> Self {
        Trend { name: name.into(), columns: [x.into(), y.into()], points }
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}: {} {}", self.name, self.columns[0], self.columns[1])?;
        for (x, y) in &self.points {
            writeln!(out, "{x:e} {y:e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub study: Study,
    pub config: RunConfig,
    pub records: Vec<Record>,
    pub summary: Vec<SummaryEntry>,
    pub slopes: Vec<Slope>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trends: Vec<Trend>,
    pub passed: bool,
}

impl StudyResult {
    pub fn new(study: Study, mut config: RunConfig) -> Self {
        // the thread count never changes the numbers, so it is not recorded
        config.jobs = None;
        StudyResult {
            study,
            config,
            records: Vec::new(),
            summary: Vec::new(),
            slopes: Vec::new(),
            checks: Vec::new(),
            trends: Vec::new(),
            passed: true,
        }
    }

    pub fn record(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn slope(&mut self, name: impl Into<String>, value: f64) {
        self.slopes.push(Slope { name: name.into(), value });
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn trend(&mut self, t: Trend) {
        self.trends.push(t);
    }

    pub fn find(&self, key: &str, level: usize) -> Option<&Record> {
        self.records.iter().find(|r| r.key == key && r.level == level)
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Recomputes the summary and the overall verdict.
    pub fn finish(mut self) -> Self {
        self.summary = self.records.iter().map(SummaryEntry::from).collect();
        self.passed = self.checks.iter().filter(|c| c.gating).all(|c| c.passed);
        self
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.gating && !c.passed).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// Parses a saved result and checks that its summary and verdict follow
    /// from its records and checks.
    pub fn from_json(text: &str) -> Result<Self> {
        let r: StudyResult = serde_json::from_str(text)?;
        let recomputed = r.clone().finish();
        let same = recomputed.summary.len() == r.summary.len()
            && recomputed.summary.iter().zip(&r.summary).all(|(a, b)| summary_eq(a, b));
        if !same {
            return Err(Error::config("stored summary does not match its records"));
        }
        if recomputed.passed != r.passed {
            return Err(Error::config("stored verdict does not match its checks"));
        }
        Ok(r)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Writes the JSON result to `path` and each trend next to it as
    /// `<stem>.<trend>.dat`. Returns the files written.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let path = path.as_ref();
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(path, self.to_json())?;
        let mut written = vec![path.to_path_buf()];
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("result");
        for t in &self.trends {
            let p = path.with_file_name(format!("{stem}.{}.dat", t.name));
            t.write(std::io::BufWriter::new(std::fs::File::create(&p)?))?;
            written.push(p);
        }
        Ok(written)
    }
}

// NaN-tolerant comparison; JSON round-trips finite f64 exactly
fn summary_eq(a: &SummaryEntry, b: &SummaryEntry) -> bool {
    let f = |x: f64, y: f64| x == y || (x.is_nan() && y.is_nan());
    let o = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => f(x, y),
        (None, None) => true,
        _ => false,
    };
    a.key == b.key
        && a.level == b.level
        && a.count == b.count
        && f(a.mean, b.mean)
        && f(a.std_err, b.std_err)
        && o(a.median, b.median)
        && o(a.reference, b.reference)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope through the origin, `Σ x y / Σ x²`.
pub fn fit_slope_origin(points: &[(f64, f64)]) -> f64 {
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    sxy / sxx
}

/// Log-log slope, i.e. the observed order `p` in `y ~ x^p`.
pub fn fit_order(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    fit_slope(&logs)
}

/// Strictly decreasing.
pub fn decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}
