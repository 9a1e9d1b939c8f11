//! Per-trial records, summary statistics, and the CSV output format.

use std::io::{self, Write};

use thiserror::Error;

/// Exact CSV header, in column order.
pub const CSV_HEADER: &str =
    "policy,graph,n,param,trial,seed,rounds,terminated,total_beeps,beeps_per_node,mis_size";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no samples to summarize")]
    EmptySample,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// One simulation run, as written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub policy: String,
    /// Graph family name, e.g. `er` or `grid`.
    pub graph: String,
    /// Node count of the simulated graph.
    pub n: usize,
    /// Family parameter, e.g. the edge probability or `rowsxcols`.
    pub param: String,
    pub trial: u64,
    pub seed: u64,
    pub rounds: u64,
    pub terminated: bool,
    pub total_beeps: u64,
    pub beeps_per_node: f64,
    pub mis_size: usize,
}

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.policy,
            self.graph,
            self.n,
            self.param,
            self.trial,
            self.seed,
            self.rounds,
            self.terminated,
            self.total_beeps,
            format_float(self.beeps_per_node),
            self.mis_size
        )
    }
}

/// Writes the header and one row per record, LF line endings.
pub fn write_csv<W: Write>(mut out: W, records: &[TrialRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    out.flush()
}

pub fn to_csv_string(records: &[TrialRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Formats with at most 6 significant digits and no trailing zeros.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".to_string()
        } else {
            x.to_string()
        };
    }
    // Round to 6 significant digits first so that e.g. 9.9999996 becomes 10.
    let rounded: f64 = format!("{x:.5e}").parse().expect("valid float");
    let magnitude = rounded.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let mut s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    s
}

/// Numeric column that [`summarize`] can aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    /// Only terminated trials contribute.
    Rounds,
    TotalBeeps,
    BeepsPerNode,
    MisSize,
}

impl Field {
    fn value(&self, r: &TrialRecord) -> Option<f64> {
        match self {
            Field::Rounds => r.terminated.then_some(r.rounds as f64),
            Field::TotalBeeps => Some(r.total_beeps as f64),
            Field::BeepsPerNode => Some(r.beeps_per_node),
            Field::MisSize => Some(r.mis_size as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (divisor `N - 1`); zero when `N = 1`.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

impl SummaryStats {
    pub fn from_values(values: &[f64]) -> Result<Self, MetricsError> {
        if values.is_empty() {
            return Err(MetricsError::EmptySample);
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let stddev = if count > 1 {
            let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            count,
            // Summation order can push the mean a hair outside [min, max].
            mean: mean.clamp(min, max),
            stddev,
            min,
            max,
        })
    }
}

/// Summary of one column over `records`. Non-terminated trials are skipped
/// for [`Field::Rounds`]; use [`non_terminated`] to count them.
pub fn summarize(records: &[TrialRecord], field: Field) -> Result<SummaryStats, MetricsError> {
    let values: Vec<f64> = records.iter().filter_map(|r| field.value(r)).collect();
    SummaryStats::from_values(&values)
}

pub fn non_terminated(records: &[TrialRecord]) -> usize {
    records.iter().filter(|r| !r.terminated).count()
}

/// Per-node-count summaries in ascending `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub n: usize,
    pub trials: usize,
    pub non_terminated: usize,
    pub rounds: Option<SummaryStats>,
    pub beeps_per_node: SummaryStats,
}

pub fn summarize_by_n(records: &[TrialRecord]) -> Vec<GroupSummary> {
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let group: Vec<TrialRecord> = records.iter().filter(|r| r.n == n).cloned().collect();
            GroupSummary {
                n,
                trials: group.len(),
                non_terminated: non_terminated(&group),
                rounds: summarize(&group, Field::Rounds).ok(),
                beeps_per_node: summarize(&group, Field::BeepsPerNode).expect("group is nonempty"),
            }
        })
        .collect()
}

/// Reference curves, base-2 logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCurves {
    pub log2n: f64,
    pub log2n_squared: f64,
    /// `2.5 * log2(n)`.
    pub scaled: f64,
}

pub fn reference_curves(n: usize) -> Result<ReferenceCurves, MetricsError> {
    if n < 2 {
        return Err(MetricsError::InvalidParameter(format!(
            "reference curves need n >= 2, got {n}"
        )));
    }
    let log2n = (n as f64).log2();
    Ok(ReferenceCurves {
        log2n,
        log2n_squared: log2n * log2n,
        scaled: 2.5 * log2n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rounds: u64, terminated: bool) -> TrialRecord {
        TrialRecord {
            policy: "feedback".into(),
            graph: "clique".into(),
            n: 2,
            param: "2".into(),
            trial: 0,
            seed: 0,
            rounds,
            terminated,
            total_beeps: rounds,
            beeps_per_node: rounds as f64 / 2.0,
            mis_size: 1,
        }
    }

    #[test]
    fn summarize_examples() {
        let s = summarize(&[record(4, true)], Field::Rounds).unwrap();
        assert_eq!((s.mean, s.stddev), (4.0, 0.0));
        let s = summarize(&[record(2, true), record(4, true)], Field::Rounds).unwrap();
        assert_eq!(s.mean, 3.0);
        assert!((s.stddev - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!((s.min, s.max), (2.0, 4.0));
        assert_eq!(
            summarize(&[], Field::Rounds),
            Err(MetricsError::EmptySample)
        );
    }

    #[test]
    fn non_terminated_rounds_excluded() {
        let rs = [record(3, true), record(1000, false)];
        let s = summarize(&rs, Field::Rounds).unwrap();
        assert_eq!((s.count, s.mean), (1, 3.0));
        assert_eq!(non_terminated(&rs), 1);
        assert_eq!(summarize(&rs, Field::TotalBeeps).unwrap().count, 2);
        assert_eq!(
            summarize(&[record(9, false)], Field::Rounds),
            Err(MetricsError::EmptySample)
        );
    }

    #[test]
    fn reference_curve_examples() {
        let r = reference_curves(1024).unwrap();
        assert_eq!((r.log2n, r.log2n_squared, r.scaled), (10.0, 100.0, 25.0));
        let r = reference_curves(2).unwrap();
        assert_eq!((r.log2n, r.log2n_squared, r.scaled), (1.0, 1.0, 2.5));
        let r = reference_curves(64).unwrap();
        assert_eq!((r.log2n, r.log2n_squared, r.scaled), (6.0, 36.0, 15.0));
        assert!(reference_curves(1).is_err());
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(1.5), "1.5");
        assert_eq!(format_float(1.0 / 3.0), "0.333333");
        assert_eq!(format_float(2.0 / 3.0), "0.666667");
        assert_eq!(format_float(1234.5678), "1234.57");
        assert_eq!(format_float(9.9999996), "10");
        assert_eq!(format_float(0.000123456789), "0.000123457");
        assert_eq!(format_float(1_000_000.0), "1000000");
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv_string(&[record(3, true)]);
        assert_eq!(
            csv,
            format!("{CSV_HEADER}\nfeedback,clique,2,2,0,0,3,true,3,1.5,1\n")
        );
    }

    #[test]
    fn grouping() {
        let mut a = record(2, true);
        a.n = 4;
        let b = record(6, false);
        let groups = summarize_by_n(&[a, b]);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].n, 2);
        assert!(groups[0].rounds.is_none());
        assert_eq!(groups[0].non_terminated, 1);
        assert_eq!(groups[1].rounds.unwrap().mean, 2.0);
    }
}
