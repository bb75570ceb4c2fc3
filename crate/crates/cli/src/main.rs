use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use urngame::metrics::Beta;
use urngame::GameVariant;
use urngame_cli::commands::{self, Outcome};
use urngame_cli::config::SweepConfig;
use urngame_cli::error::Result;
use urngame_cli::plot::Figure;

#[derive(Parser)]
#[command(name = "urngame", version, about = "Exact and simulated join/leave urn games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the one-round kernels of every grid cell.
    Build(#[command(flatten)] Overrides),
    /// Compute exact metrics for every grid cell.
    Analyze(#[command(flatten)] Overrides),
    /// Estimate metrics by Monte Carlo for every grid cell.
    Simulate(#[command(flatten)] Overrides),
    /// Compare a Monte Carlo metrics file against an exact one.
    Compare {
        exact: PathBuf,
        mc: PathBuf,
        /// Directory for compare.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write gnuplot scripts from a metrics file.
    Plot {
        metrics: PathBuf,
        /// Directory for the scripts; defaults to the metrics file's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', value_parser = parse_figure)]
        figure: Vec<Figure>,
    },
    /// Regenerate both figures from scratch.
    ReproduceFigures(#[command(flatten)] Overrides),
    /// Write the table of printed-form kernel discrepancies for game 2.
    Audit(#[command(flatten)] Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    /// TOML file with the sweep configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated variant names, or "all".
    #[arg(long, value_delimiter = ',')]
    variant: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    #[arg(long = "k-max")]
    k_max: Option<usize>,
    /// Start law for the safe-cluster series: origin or initial.
    #[arg(long, value_parser = parse_beta)]
    beta: Option<Beta>,
    /// Also write per-trial CSVs.
    #[arg(long = "write-trials")]
    write_trials: bool,
}

fn parse_figure(s: &str) -> std::result::Result<Figure, String> {
    Figure::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| format!("unknown figure '{s}' (fig4a, fig4b)"))
}

fn parse_beta(s: &str) -> std::result::Result<Beta, String> {
    match s {
        "origin" => Ok(Beta::Origin),
        "initial" => Ok(Beta::Initial),
        _ => Err(format!("unknown start law '{s}' (origin, initial)")),
    }
}

impl Overrides {
    /// Defaults, then the config file, then flags.
    fn resolve(self) -> Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(path) => SweepConfig::load(path)?,
            None => SweepConfig::default(),
        };
        if let Some(v) = self.out {
            cfg.out = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(names) = self.variant {
            cfg.grid.variants = if names.iter().any(|n| n == "all") {
                GameVariant::ALL.to_vec()
            } else {
                names.iter().map(|n| n.parse()).collect::<urngame::Result<_>>()?
            };
        }
        if let Some(v) = self.c {
            cfg.grid.c = v;
        }
        if let Some(v) = self.s {
            cfg.grid.s = v;
        }
        if let Some(v) = self.mu {
            cfg.grid.mu = v;
        }
        if let Some(v) = self.trials {
            cfg.monte_carlo.trials = v;
        }
        if let Some(v) = self.horizon {
            cfg.monte_carlo.horizon = v;
        }
        if let Some(v) = self.ell {
            cfg.analysis.ell = v;
        }
        if let Some(v) = self.n_max {
            cfg.analysis.n_max = v;
        }
        if let Some(v) = self.k_max {
            cfg.analysis.k_max = v;
        }
        if let Some(v) = self.beta {
            cfg.analysis.beta = v;
        }
        if self.write_trials {
            cfg.monte_carlo.write_trials = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Audit defaults to the small cell used for the committed table.
fn audit_config(o: Overrides) -> Result<SweepConfig> {
    let explicit = (o.c.is_some(), o.s.is_some(), o.mu.is_some(), o.out.is_some());
    let mut cfg = o.resolve()?;
    if !explicit.0 {
        cfg.grid.c = vec![4];
    }
    if !explicit.1 {
        cfg.grid.s = vec![2];
    }
    if !explicit.2 {
        cfg.grid.mu = vec![0.25];
    }
    if !explicit.3 {
        cfg.out = PathBuf::from("docs");
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Build(o) => commands::build(&o.resolve()?),
        Command::Analyze(o) => commands::analyze(&o.resolve()?),
        Command::Simulate(o) => commands::simulate(&o.resolve()?),
        Command::Compare { exact, mc, out } => commands::compare_cmd(&exact, &mc, out.as_deref()),
        Command::Plot { metrics, out, figure } => {
            let figures = if figure.is_empty() { Figure::ALL.to_vec() } else { figure };
            commands::plot(&metrics, out.as_deref(), &figures)
        }
        Command::ReproduceFigures(o) => commands::reproduce_figures(&o.resolve()?),
        Command::Audit(o) => commands::audit(&audit_config(o)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for n in &outcome.notes {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

