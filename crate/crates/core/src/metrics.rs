//! Per-cell metric rows shared by the exact analysis and the Monte Carlo runs.
//!
//! A cell is one `(variant, c, s, mu)` combination. Every number the tools export
//! is a [`MetricRow`]; rows from the two sources join on
//! `(variant, c, s, mu, metric, index)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    expected_hitting_time, expected_sojourn, hitting_time_cdf, p_safe, partition, safe_probability_series,
    sojourn_operator, sojourn_time_cdf, stationary_distribution, stationary_residual,
};
use crate::error::{Error, Result};
use crate::kernel::{build_kernel, Adversary, GameVariant};
use crate::model::{classify, initial_distribution, Distribution, GameParams, StateClass};
use crate::sim::{estimate_metrics, MonteCarloConfig, MonteCarloEstimate, Start, StopRule, TrialResult, TrialSeed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Exact,
    Mc,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Exact => "exact",
            Source::Mc => "mc",
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Source::Exact),
            "mc" => Ok(Source::Mc),
            _ => Err(Error::Domain(format!("unknown source '{s}'"))),
        }
    }
}

macro_rules! metrics {
    ($($variant:ident => $name:literal,)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Metric {
            $($variant,)*
        }

        impl Metric {
            pub const ALL: &'static [Metric] = &[$(Metric::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Metric::$variant => $name,)*
                }
            }
        }
    };
}

metrics! {
    ExpectedHittingTime => "expected_hitting_time",
    ExpectedSafeSojourn => "expected_safe_sojourn",
    ExpectedTimeToClosed => "expected_time_to_closed",
    HittingCdf => "hitting_cdf",
    SojournCdf => "sojourn_cdf",
    Stationary => "stationary",
    StationarySafeMass => "stationary_safe_mass",
    PSafe => "p_safe",
    SafeProbability => "safe_probability",
    ExpectedSafeClusters => "expected_safe_clusters",
}

impl Metric {
    /// Probabilities estimated as empirical frequencies; their Monte Carlo error is binomial.
    pub fn is_probability(self) -> bool {
        matches!(self, Metric::HittingCdf | Metric::SojournCdf)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown metric '{s}'")))
    }
}

/// Identifies one parameter cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub variant: GameVariant,
    pub c: usize,
    pub s: usize,
    pub mu: f64,
}

impl Cell {
    pub fn new(variant: GameVariant, c: usize, s: usize, mu: f64) -> Self {
        Cell { variant, c, s, mu }
    }

    pub fn params(&self) -> Result<GameParams<f64>> {
        GameParams::new(self.c, self.s, self.mu)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} c={} s={} mu={}", self.variant, self.c, self.s, self.mu)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub source: Source,
    pub cell: Cell,
    pub metric: Metric,
    /// `k` for distributions over time, `n` for round series, the flat state index
    /// for `stationary`; empty for scalars.
    pub index: Option<u64>,
    pub value: f64,
    pub stderr: Option<f64>,
    pub samples: Option<u64>,
}

impl MetricRow {
    pub fn exact(cell: Cell, metric: Metric, index: Option<u64>, value: f64) -> Self {
        MetricRow { source: Source::Exact, cell, metric, index, value, stderr: None, samples: None }
    }

    /// Join key shared by exact and Monte Carlo rows. `mu` is compared bitwise.
    pub fn key(&self) -> (GameVariant, usize, usize, u64, Metric, Option<u64>) {
        (self.cell.variant, self.cell.c, self.cell.s, self.cell.mu.to_bits(), self.metric, self.index)
    }
}

/// Initial law of every cluster in the safe-cluster series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Beta {
    /// All clusters start from the all-white state `(0,0)`.
    #[default]
    Origin,
    /// Clusters start from the product-binomial law of fresh urns.
    Initial,
}

impl Beta {
    pub fn distribution(self, params: &GameParams<f64>) -> Distribution<f64> {
        match self {
            Beta::Origin => Distribution::point_mass(params.dimension(), 0).expect("origin is a state"),
            Beta::Initial => initial_distribution(params),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    /// CDFs are reported for `k = 0..=k_max`.
    pub k_max: usize,
    pub ell: usize,
    /// Safe-cluster series run over `n = 0..=n_max`.
    pub n_max: usize,
    pub beta: Beta,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { k_max: 100, ell: 100, n_max: 200, beta: Beta::Origin }
    }
}

/// Rows plus human-readable notes about metrics that do not apply to the cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CellReport {
    pub rows: Vec<MetricRow>,
    pub diagnostics: Vec<String>,
}

impl CellReport {
    fn note(&mut self, cell: &Cell, what: &str, err: impl fmt::Display) {
        self.diagnostics.push(format!("{cell}: {what}: {err}"));
    }
}

/// Exact metrics for one cell.
///
/// Unconstrained variants get the safe-sojourn metrics; constrained variants get
/// the stationary law. Anything that does not apply is recorded as a diagnostic.
pub fn exact_cell(cell: Cell, opts: &AnalysisOptions) -> Result<CellReport> {
    let params = cell.params()?;
    let kernel = build_kernel(cell.variant, &params);
    let mut report = CellReport::default();
    let push = |rows: &mut Vec<MetricRow>, metric, index: Option<usize>, value: f64| {
        rows.push(MetricRow::exact(cell, metric, index.map(|i| i as u64), value));
    };

    let two_way = partition(&kernel, false);
    match expected_hitting_time(&two_way) {
        Ok(v) => push(&mut report.rows, Metric::ExpectedHittingTime, None, v),
        Err(e) => report.note(&cell, "expected hitting time", e),
    }
    for (k, v) in hitting_time_cdf(&two_way, opts.k_max).into_iter().enumerate() {
        push(&mut report.rows, Metric::HittingCdf, Some(k), v);
    }

    if cell.variant.adversary == Adversary::Unconstrained {
        let three_way = partition(&kernel, true);
        match sojourn_operator(&three_way) {
            Ok(op) => {
                match expected_sojourn(&op) {
                    Ok(v) => push(&mut report.rows, Metric::ExpectedSafeSojourn, None, v),
                    Err(e) => report.note(&cell, "expected safe sojourn", e),
                }
                for (k, v) in sojourn_time_cdf(&op, opts.k_max).into_iter().enumerate() {
                    push(&mut report.rows, Metric::SojournCdf, Some(k), v);
                }
            }
            Err(e) => report.note(&cell, "sojourn operator", e),
        }
        match three_way.expected_time_to_closed() {
            Ok(v) => push(&mut report.rows, Metric::ExpectedTimeToClosed, None, v),
            Err(e) => report.note(&cell, "expected time to closed set", e),
        }
    } else {
        report.diagnostics.push(format!(
            "{cell}: safe sojourn: not reported, a constrained chain returns to the safe set forever"
        ));
    }

    match stationary_distribution(&kernel) {
        Ok(pi) => {
            let residual = stationary_residual(&kernel, pi.as_slice());
            if residual > 1e-12 {
                report.note(&cell, "stationary", format!("residual {residual:e} exceeds 1e-12"));
            }
            let mut safe_mass = 0.0;
            for (i, &v) in pi.as_slice().iter().enumerate() {
                let state = params.state(i)?;
                if classify(state, &params, false)? == StateClass::Safe {
                    safe_mass += v;
                }
                push(&mut report.rows, Metric::Stationary, Some(i), v);
            }
            push(&mut report.rows, Metric::StationarySafeMass, None, safe_mass);
            push(&mut report.rows, Metric::PSafe, None, p_safe(&params));
        }
        Err(e) => report.note(&cell, "stationary", e),
    }

    if opts.ell > 0 {
        let beta = opts.beta.distribution(&params);
        let series = safe_probability_series(&kernel, &beta, opts.n_max)?;
        for (n, p) in series.into_iter().enumerate() {
            push(&mut report.rows, Metric::SafeProbability, Some(n), p);
            push(&mut report.rows, Metric::ExpectedSafeClusters, Some(n), opts.ell as f64 * p);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub trials: u64,
    pub horizon: u64,
    pub seed: u64,
    /// Time indices at which empirical CDFs are reported.
    pub cdf_points: Vec<u64>,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions { trials: 100_000, horizon: crate::sim::DEFAULT_HORIZON, seed: 1, cdf_points: vec![1, 5, 10, 50] }
    }
}

/// Monte Carlo counterpart of [`exact_cell`] for the time metrics, starting from
/// fresh urns. Constrained variants stop at first pollution; unconstrained ones
/// run to absorption so both the hitting time and the safe sojourn are observed.
pub fn simulate_cell(cell: Cell, opts: &SimulationOptions) -> Result<(CellReport, MonteCarloEstimate)> {
    let params = cell.params()?;
    let stop = if cell.variant.is_constrained() { StopRule::FirstPollution } else { StopRule::Absorption };
    let config = MonteCarloConfig { trials: opts.trials, horizon: opts.horizon, master_seed: opts.seed, stop, start: Start::SampleInitial };
    let est = estimate_metrics(cell.variant, &params, &config)?;
    let mut report = CellReport::default();
    let mc = |metric, index: Option<u64>, value: f64, stderr: f64, samples: u64| MetricRow {
        source: Source::Mc,
        cell,
        metric,
        index,
        value,
        stderr: Some(stderr),
        samples: Some(samples),
    };
    let mut expectation = |metric, e: &crate::sim::Estimate, rows: &mut Vec<MetricRow>| {
        if e.lower_bound {
            report.diagnostics.push(format!(
                "{cell}: {metric}: {} of {} trials censored at horizon {}, mean is a lower bound",
                e.censored, opts.trials, opts.horizon
            ));
        }
        rows.push(mc(metric, None, e.mean, e.stderr, e.samples));
    };
    let mut rows = Vec::new();
    expectation(Metric::ExpectedHittingTime, &est.hitting_time, &mut rows);
    if !cell.variant.is_constrained() {
        expectation(Metric::ExpectedSafeSojourn, &est.safe_time, &mut rows);
    }
    for &k in &opts.cdf_points {
        let p = est.hitting_cdf(k);
        rows.push(mc(Metric::HittingCdf, Some(k), p, crate::sim::binomial_stderr(p, est.trials), est.trials));
    }
    if !cell.variant.is_constrained() {
        for &k in &opts.cdf_points {
            let p = est.safe_time_cdf(k);
            rows.push(mc(Metric::SojournCdf, Some(k), p, crate::sim::binomial_stderr(p, est.trials), est.trials));
        }
    }
    report.rows = rows;
    Ok((report, est))
}

/// Trial-level results for one cell, as written to the trial CSV.
pub fn simulate_trials(cell: Cell, opts: &SimulationOptions) -> Result<Vec<TrialResult>> {
    use rayon::prelude::*;
    let params = cell.params()?;
    let stop = if cell.variant.is_constrained() { StopRule::FirstPollution } else { StopRule::Absorption };
    (0..opts.trials)
        .into_par_iter()
        .map(|index| {
            crate::sim::run_trial(
                cell.variant,
                &params,
                Start::SampleInitial,
                opts.horizon,
                stop,
                TrialSeed { master: opts.seed, index },
            )
        })
        .collect()
}
