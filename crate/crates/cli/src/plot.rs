//! gnuplot scripts for the two figures.
//!
//! Each script carries its data inline as datablocks extracted from the metrics
//! CSV, so it renders on its own with `gnuplot fig4a.gp`.

use std::collections::BTreeMap;
use std::fmt::Write;

use urngame::metrics::{Metric, MetricRow, Source};
use urngame::GameVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Figure {
    /// Expected safe rounds against `s`, one line per `mu`.
    Fig4a,
    /// Expected number of safe clusters against `n`, one line per variant.
    Fig4b,
}

impl Figure {
    pub const ALL: [Figure; 2] = [Figure::Fig4a, Figure::Fig4b];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig4a => "fig4a",
            Figure::Fig4b => "fig4b",
        }
    }
}

struct Series {
    title: String,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotScript {
    pub figure: Figure,
    pub text: String,
}

/// Rows are bucketed by a sort key so output order never depends on CSV order.
type Bucket = BTreeMap<(usize, usize, u64), BTreeMap<GameVariant, Vec<(f64, f64)>>>;

fn bucket(rows: &[MetricRow], metric: Metric, x: impl Fn(&MetricRow) -> Option<f64>, key: impl Fn(&MetricRow) -> (usize, usize, u64)) -> Bucket {
    let mut out: Bucket = BTreeMap::new();
    for r in rows.iter().filter(|r| r.source == Source::Exact && r.metric == metric) {
        if let Some(xv) = x(r) {
            out.entry(key(r)).or_default().entry(r.cell.variant).or_default().push((xv, r.value));
        }
    }
    for variants in out.values_mut() {
        for pts in variants.values_mut() {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
    }
    out
}

fn fig4a(rows: &[MetricRow], warnings: &mut Vec<String>) -> Vec<Series> {
    let by_c_mu = |r: &MetricRow| (r.cell.c, 0, r.cell.mu.to_bits());
    let s_axis = |r: &MetricRow| Some(r.cell.s as f64);
    let hitting = bucket(rows, Metric::ExpectedHittingTime, s_axis, by_c_mu);
    let sojourn = bucket(rows, Metric::ExpectedSafeSojourn, s_axis, by_c_mu);
    let mut keys: Vec<_> = hitting.keys().chain(sojourn.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    let mut out = Vec::new();
    for key in keys {
        let (c, mu) = (key.0, f64::from_bits(key.2));
        let wanted = [
            (&hitting, GameVariant::GAME1_UNCONSTRAINED, "E(T) game 1", false),
            (&sojourn, GameVariant::GAME2_UNCONSTRAINED, "E(T_A) game 2", true),
        ];
        for (source, variant, label, dashed) in wanted {
            match source.get(&key).and_then(|m| m.get(&variant)) {
                Some(points) => out.push(Series { title: format!("{label}, c={c}, mu={mu}"), dashed, points: points.clone() }),
                None => warnings.push(format!("fig4a: missing series {label} ({variant} c={c} mu={mu}); skipped")),
            }
        }
    }
    out
}

fn fig4b(rows: &[MetricRow], warnings: &mut Vec<String>) -> Vec<Series> {
    let by_cell = |r: &MetricRow| (r.cell.c, r.cell.s, r.cell.mu.to_bits());
    let clusters = bucket(rows, Metric::ExpectedSafeClusters, |r| r.index.map(|n| n as f64), by_cell);
    let mut out = Vec::new();
    for (key, variants) in &clusters {
        let (c, s, mu) = (key.0, key.1, f64::from_bits(key.2));
        for v in GameVariant::ALL {
            match variants.get(&v) {
                Some(points) => out.push(Series {
                    title: format!("{v}, c={c}, s={s}, mu={mu}"),
                    dashed: !v.is_constrained(),
                    points: points.clone(),
                }),
                None => warnings.push(format!("fig4b: missing series {v} c={c} s={s} mu={mu}; skipped")),
            }
        }
    }
    out
}

fn render(figure: Figure, source_name: &str, series: &[Series]) -> String {
    let mut t = String::new();
    let (heading, xlabel, ylabel, logy) = match figure {
        Figure::Fig4a => ("expected rounds in safe states against the spare-urn size", "s", "expected rounds", true),
        Figure::Fig4b => ("expected number of safe clusters against rounds", "n", "E(N_n)", false),
    };
    let name = figure.name();
    let _ = writeln!(t, "# {name}: {heading}");
    let _ = writeln!(t, "# data extracted from {source_name}");
    let _ = writeln!(t, "set terminal pngcairo size 960,640");
    let _ = writeln!(t, "set output \"{name}.png\"");
    let _ = writeln!(t, "set xlabel \"{xlabel}\"");
    let _ = writeln!(t, "set ylabel \"{ylabel}\"");
    if logy {
        let _ = writeln!(t, "set logscale y");
    }
    let _ = writeln!(t, "set key outside right top");
    let _ = writeln!(t, "set grid");
    for (i, s) in series.iter().enumerate() {
        let _ = writeln!(t, "\n# {}", s.title);
        let _ = writeln!(t, "$s{i} << EOD");
        for (x, y) in &s.points {
            let _ = writeln!(t, "{x} {y}");
        }
        let _ = writeln!(t, "EOD");
    }
    let _ = writeln!(t);
    let parts: Vec<String> = series
        .iter()
        .enumerate()
        .map(|(i, s)| {
            format!(
                "$s{i} using 1:2 with linespoints lc {} dt {} title \"{}\"",
                i / 2 + 1,
                if s.dashed { 2 } else { 1 },
                s.title
            )
        })
        .collect();
    let _ = writeln!(t, "plot {}", parts.join(", \\\n     "));
    t
}

/// Builds the scripts that have at least one series. Missing series and skipped
/// figures are reported in the returned warnings.
pub fn plot_scripts(rows: &[MetricRow], source_name: &str, figures: &[Figure]) -> (Vec<PlotScript>, Vec<String>) {
    let mut warnings = Vec::new();
    let mut scripts = Vec::new();
    for &figure in figures {
        let series = match figure {
            Figure::Fig4a => fig4a(rows, &mut warnings),
            Figure::Fig4b => fig4b(rows, &mut warnings),
        };
        if series.is_empty() {
            warnings.push(format!("{}: no series in {source_name}; script not written", figure.name()));
        } else {
            scripts.push(PlotScript { figure, text: render(figure, source_name, &series) });
        }
    }
    (scripts, warnings)
}
