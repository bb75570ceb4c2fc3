use std::fs::File;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use urngame::export;
use urngame::metrics::{exact_cell, simulate_cell, simulate_trials, Cell, CellReport, MetricRow};
use urngame::{build_kernel, GameVariant};

use crate::compare::{compare, report_csv, CompareReport, Z_LIMIT};
use crate::config::SweepConfig;
use crate::error::{CliError, Result};
use crate::output::{write_atomic, write_text};
use crate::plot::{plot_scripts, Figure};

/// Messages for the user; commands print them to stderr.
#[derive(Debug, Default)]
pub struct Outcome {
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Validation(format!("worker pool: {e}")))
}

fn prepare(cfg: &SweepConfig) -> Result<rayon::ThreadPool> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    write_text(&cfg.out.join("config.toml"), &cfg.to_toml())?;
    pool(cfg.workers)
}

fn cell_stem(cell: &Cell) -> String {
    format!("{}_c{}_s{}_mu{}", cell.variant, cell.c, cell.s, cell.mu)
}

pub fn build(cfg: &SweepConfig) -> Result<Outcome> {
    let pool = prepare(cfg)?;
    let dir = cfg.out.join("kernels");
    let cells = cfg.cells();
    let audit = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| -> Result<export::KernelHeader> {
                let kernel = build_kernel(cell.variant, &cell.params()?);
                let stem = cell_stem(cell);
                write_atomic(&dir.join(format!("{stem}.csv")), |w| export::write_kernel_csv(w, &kernel))?;
                write_atomic(&dir.join(format!("{stem}.json")), |w| export::write_kernel_header(w, &kernel))?;
                Ok(export::kernel_header(&kernel))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut out = Outcome::default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Validation(e.to_string());
    w.write_record(["variant", "c", "s", "mu", "states", "nonzeros", "max_row_sum_deviation", "stochastic"]).map_err(io)?;
    let mut worst: f64 = 0.0;
    for h in &audit {
        let ok = h.max_row_sum_deviation < 1e-12;
        worst = worst.max(h.max_row_sum_deviation);
        if !ok {
            out.warnings.push(format!("{} c={} s={} mu={}: row sums off by {:e}", h.variant, h.c, h.s, h.mu, h.max_row_sum_deviation));
        }
        w.write_record([
            h.variant.to_string(),
            h.c.to_string(),
            h.s.to_string(),
            h.mu.to_string(),
            h.states.to_string(),
            h.nonzeros.to_string(),
            h.max_row_sum_deviation.to_string(),
            ok.to_string(),
        ])
        .map_err(io)?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| CliError::Validation(e.to_string()))?).expect("utf-8");
    write_text(&dir.join("audit.csv"), &text)?;
    out.notes.push(format!("wrote {} kernels to {}; max |row sum - 1| = {worst:e}", audit.len(), dir.display()));
    Ok(out)
}

fn collect(reports: Vec<CellReport>) -> (Vec<MetricRow>, Vec<String>) {
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for r in reports {
        rows.extend(r.rows);
        diagnostics.extend(r.diagnostics);
    }
    (rows, diagnostics)
}

fn write_diagnostics(path: &Path, lines: &[String]) -> Result<()> {
    let mut text = lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn analyze(cfg: &SweepConfig) -> Result<Outcome> {
    let pool = prepare(cfg)?;
    let opts = cfg.analysis_options();
    let cells = cfg.cells();
    let reports = pool.install(|| cells.par_iter().map(|c| exact_cell(*c, &opts)).collect::<urngame::Result<Vec<_>>>())?;
    let (rows, diagnostics) = collect(reports);
    let path = cfg.out.join("metrics.csv");
    write_atomic(&path, |w| export::write_metrics(w, &rows))?;
    write_diagnostics(&cfg.out.join("diagnostics.txt"), &diagnostics)?;
    Ok(Outcome {
        notes: vec![format!("wrote {} rows for {} cells to {}", rows.len(), cells.len(), path.display())],
        warnings: diagnostics,
    })
}

pub fn simulate(cfg: &SweepConfig) -> Result<Outcome> {
    let pool = prepare(cfg)?;
    let opts = cfg.simulation_options();
    let cells = cfg.cells();
    let trials_dir = cfg.out.join("trials");
    let write_trials = cfg.monte_carlo.write_trials;
    let reports = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| -> Result<CellReport> {
                let (report, _) = simulate_cell(*cell, &opts)?;
                if write_trials {
                    let trials = simulate_trials(*cell, &opts)?;
                    let path = trials_dir.join(format!("{}.csv", cell_stem(cell)));
                    write_atomic(&path, |w| export::write_trials(w, &trials))?;
                }
                Ok(report)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let (rows, diagnostics) = collect(reports);
    let path = cfg.out.join("mc.csv");
    write_atomic(&path, |w| export::write_metrics(w, &rows))?;
    write_diagnostics(&cfg.out.join("mc-diagnostics.txt"), &diagnostics)?;
    Ok(Outcome {
        notes: vec![format!("wrote {} rows from {} trials per cell to {}", rows.len(), opts.trials, path.display())],
        warnings: diagnostics,
    })
}

fn read_metrics_file(path: &Path) -> Result<Vec<MetricRow>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    export::read_metrics(file).map_err(|e| CliError::from_lib(path, e))
}

/// Compares `candidate` against `reference`; a failed comparison is an error with
/// exit code 2 after the report has been written.
pub fn compare_files(reference: &Path, candidate: &Path, out: Option<&Path>) -> Result<(CompareReport, Outcome)> {
    let exact = read_metrics_file(reference)?;
    let mc = read_metrics_file(candidate)?;
    let report = compare(&exact, &mc);
    if report.comparisons.is_empty() {
        return Err(CliError::Validation(format!(
            "{} and {} have no rows in common",
            reference.display(),
            candidate.display()
        )));
    }
    if let Some(dir) = out {
        write_text(&dir.join("compare.csv"), &report_csv(&report))?;
    }
    let mut outcome = Outcome::default();
    outcome.notes.push(format!(
        "compared {} rows, max |z| = {:.3}",
        report.comparisons.len(),
        report.max_abs_z()
    ));
    if report.unmatched > 0 {
        outcome.warnings.push(format!("{} rows of {} have no reference value", report.unmatched, candidate.display()));
    }
    for f in report.failures() {
        let r = &f.row;
        outcome.warnings.push(format!(
            "{} {} index {}: estimate {} vs {} (stderr {}, z = {:.2})",
            r.cell,
            r.metric,
            r.index.map(|i| i.to_string()).unwrap_or_else(|| "-".into()),
            r.value,
            f.reference,
            f.stderr,
            f.z
        ));
    }
    Ok((report, outcome))
}

pub fn compare_cmd(reference: &Path, candidate: &Path, out: Option<&Path>) -> Result<Outcome> {
    let (report, outcome) = compare_files(reference, candidate, out)?;
    let failures = report.failures().count();
    if failures > 0 {
        for w in &outcome.warnings {
            eprintln!("warning: {w}");
        }
        return Err(CliError::Comparison(format!("{failures} rows exceed |z| = {Z_LIMIT}")));
    }
    Ok(outcome)
}

pub fn plot(metrics: &Path, out: Option<&Path>, figures: &[Figure]) -> Result<Outcome> {
    let rows = read_metrics_file(metrics)?;
    let dir: PathBuf = match out {
        Some(d) => d.to_path_buf(),
        None => metrics.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let name = metrics.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let (scripts, warnings) = plot_scripts(&rows, &name, figures);
    let mut notes = Vec::new();
    for s in &scripts {
        let path = dir.join(format!("{}.gp", s.figure.name()));
        write_text(&path, &s.text)?;
        notes.push(format!("wrote {}", path.display()));
    }
    Ok(Outcome { notes, warnings })
}

/// Figure presets at desk scale.
pub fn figure_configs(base: &SweepConfig) -> [(Figure, SweepConfig); 2] {
    let mut a = base.clone();
    a.out = base.out.join("fig4a");
    a.grid.variants = vec![GameVariant::GAME1_UNCONSTRAINED, GameVariant::GAME2_UNCONSTRAINED];
    a.grid.c = vec![7];
    a.grid.s = (1..=20).collect();
    a.grid.mu = vec![0.1, 0.25, 0.5];
    a.analysis.n_max = 0;

    let mut b = base.clone();
    b.out = base.out.join("fig4b");
    b.grid.variants = GameVariant::ALL.to_vec();
    b.grid.c = vec![7];
    b.grid.s = vec![5];
    b.grid.mu = vec![0.25];
    [(Figure::Fig4a, a), (Figure::Fig4b, b)]
}

pub fn reproduce_figures(base: &SweepConfig) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    for (figure, cfg) in figure_configs(base) {
        let analysis = analyze(&cfg)?;
        outcome.notes.extend(analysis.notes);
        let plotted = plot(&cfg.out.join("metrics.csv"), None, &[figure])?;
        outcome.notes.extend(plotted.notes);
        outcome.warnings.extend(plotted.warnings);
    }
    Ok(outcome)
}

/// Writes the printed-form discrepancy table for the game-2 variants and checks
/// that game 1 has none.
pub fn audit(cfg: &SweepConfig) -> Result<Outcome> {
    cfg.validate()?;
    let mut outcome = Outcome::default();
    for cell in cfg.cells().into_iter().filter(|c| c.variant.game == urngame::Game::One) {
        let pr = cell.params()?;
        let d = urngame::kernel_diff(&urngame::printed_kernel(cell.variant, &pr), &build_kernel(cell.variant, &pr), 1e-9)?;
        if !d.is_empty() {
            outcome.warnings.push(format!("{cell}: {} printed-form entries differ", d.len()));
        }
    }
    let game2 = [GameVariant::GAME2_UNCONSTRAINED, GameVariant::GAME2_CONSTRAINED];
    for &c in &cfg.grid.c {
        for &s in &cfg.grid.s {
            for &mu in &cfg.grid.mu {
                let pr = Cell::new(game2[0], c, s, mu).params()?;
                let name = if cfg.grid.c.len() * cfg.grid.s.len() * cfg.grid.mu.len() == 1 {
                    "game2-discrepancies.csv".to_string()
                } else {
                    format!("game2-discrepancies_c{c}_s{s}_mu{mu}.csv")
                };
                let path = cfg.out.join(name);
                let mut counts = Vec::new();
                write_atomic(&path, |w| {
                    counts = export::write_printed_form_audit(w, &pr, &game2, 1e-9)?;
                    Ok(())
                })?;
                outcome.notes.push(format!("wrote {} ({} + {} rows)", path.display(), counts[0], counts[1]));
            }
        }
    }
    Ok(outcome)
}
