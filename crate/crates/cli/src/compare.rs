//! z-scores of one metrics file against a reference file.

use std::collections::HashMap;

use urngame::metrics::MetricRow;
use urngame::sim::{binomial_stderr, z_score};

/// |z| above this fails the comparison.
pub const Z_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub row: MetricRow,
    pub reference: f64,
    /// Standard error used for `z`.
    pub stderr: f64,
    pub z: f64,
}

impl Comparison {
    pub fn failed(&self) -> bool {
        self.z.is_nan() || self.z.abs() > Z_LIMIT
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompareReport {
    pub comparisons: Vec<Comparison>,
    /// Rows of the candidate file with no reference counterpart.
    pub unmatched: usize,
}

impl CompareReport {
    pub fn failures(&self) -> impl Iterator<Item = &Comparison> {
        self.comparisons.iter().filter(|c| c.failed())
    }

    pub fn max_abs_z(&self) -> f64 {
        self.comparisons.iter().map(|c| c.z.abs()).fold(0.0, f64::max)
    }
}

/// Matches every candidate row to the reference row with the same key.
///
/// Probability rows with a sample count use the binomial error of the reference
/// probability; everything else uses the candidate's own `stderr` (zero when
/// absent, so only exact agreement passes).
pub fn compare(reference: &[MetricRow], candidate: &[MetricRow]) -> CompareReport {
    let lookup: HashMap<_, f64> = reference.iter().map(|r| (r.key(), r.value)).collect();
    let mut report = CompareReport::default();
    for row in candidate {
        let Some(&exact) = lookup.get(&row.key()) else {
            report.unmatched += 1;
            continue;
        };
        let stderr = match row.samples {
            Some(n) if row.metric.is_probability() && n > 0 => binomial_stderr(exact, n),
            _ => row.stderr.unwrap_or(0.0),
        };
        report.comparisons.push(Comparison { row: row.clone(), reference: exact, stderr, z: z_score(row.value, exact, stderr) });
    }
    report
}

pub fn report_csv(report: &CompareReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = ["variant", "c", "s", "mu", "metric", "index", "reference", "estimate", "stderr", "z"];
    w.write_record(header).expect("in-memory write");
    for c in &report.comparisons {
        let r = &c.row;
        w.write_record([
            r.cell.variant.to_string(),
            r.cell.c.to_string(),
            r.cell.s.to_string(),
            r.cell.mu.to_string(),
            r.metric.to_string(),
            r.index.map(|i| i.to_string()).unwrap_or_default(),
            c.reference.to_string(),
            r.value.to_string(),
            c.stderr.to_string(),
            c.z.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use urngame::metrics::{Cell, Metric, Source};
    use urngame::GameVariant;

    fn cell() -> Cell {
        Cell::new(GameVariant::GAME1_UNCONSTRAINED, 4, 2, 0.25)
    }

    fn mc(metric: Metric, index: Option<u64>, value: f64, stderr: f64, samples: u64) -> MetricRow {
        MetricRow { source: Source::Mc, cell: cell(), metric, index, value, stderr: Some(stderr), samples: Some(samples) }
    }

    #[test]
    fn exact_against_itself_is_all_zero() {
        let rows = vec![
            MetricRow::exact(cell(), Metric::ExpectedHittingTime, None, 5.8),
            MetricRow::exact(cell(), Metric::HittingCdf, Some(3), 0.4),
        ];
        let r = compare(&rows, &rows);
        assert_eq!(r.comparisons.len(), 2);
        assert!(r.comparisons.iter().all(|c| c.z == 0.0));
    }

    #[test]
    fn probability_rows_use_reference_binomial_error() {
        let exact = vec![MetricRow::exact(cell(), Metric::HittingCdf, Some(5), 0.5)];
        let r = compare(&exact, &[mc(Metric::HittingCdf, Some(5), 0.51, 0.0, 10_000)]);
        assert!((r.comparisons[0].stderr - 0.005).abs() < 1e-15);
        assert!((r.comparisons[0].z - 2.0).abs() < 1e-9);
    }

    #[test]
    fn large_deviation_fails_and_unmatched_rows_are_counted() {
        let exact = vec![MetricRow::exact(cell(), Metric::ExpectedHittingTime, None, 5.0)];
        let cand = vec![mc(Metric::ExpectedHittingTime, None, 6.0, 0.1, 100), mc(Metric::ExpectedSafeSojourn, None, 1.0, 0.1, 100)];
        let r = compare(&exact, &cand);
        assert_eq!(r.unmatched, 1);
        assert_eq!(r.failures().count(), 1);
        assert!((r.max_abs_z() - 10.0).abs() < 1e-9);
        assert!(report_csv(&r).lines().nth(1).unwrap().ends_with(",5,6,0.1,10"));
    }

    #[test]
    fn nan_estimate_fails() {
        let exact = vec![MetricRow::exact(cell(), Metric::ExpectedHittingTime, None, 5.0)];
        let r = compare(&exact, &[mc(Metric::ExpectedHittingTime, None, f64::NAN, 0.1, 100)]);
        assert!(r.comparisons[0].failed());
    }
}
