//! Sweep configuration: a TOML file with nested sections, overridable from the
//! command line.
//!
//! ```toml
//! out = "results"
//! seed = 1
//! workers = 0          # 0 uses every core
//!
//! [grid]
//! variants = ["game1-unconstrained", "game2-unconstrained"]
//! c = [7]
//! s = [1, 5, 20, 50]
//! mu = [0.1, 0.25, 0.5]
//!
//! [analysis]
//! k_max = 100          # CDFs over k = 0..=k_max
//! ell = 100            # clusters in the safe-cluster series
//! n_max = 200          # rounds in the safe-cluster series
//! beta = "origin"      # or "initial"
//!
//! [monte_carlo]
//! trials = 100000
//! horizon = 1000000
//! cdf_points = [1, 5, 10, 50]
//! write_trials = false
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use urngame::metrics::{AnalysisOptions, Beta, Cell, SimulationOptions};
use urngame::model::GameParams;
use urngame::GameVariant;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub out: PathBuf,
    pub seed: u64,
    pub workers: usize,
    pub grid: Grid,
    pub analysis: AnalysisSection,
    pub monte_carlo: MonteCarloSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub variants: Vec<GameVariant>,
    pub c: Vec<usize>,
    pub s: Vec<usize>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub k_max: usize,
    pub ell: usize,
    pub n_max: usize,
    pub beta: Beta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub trials: u64,
    pub horizon: u64,
    pub cdf_points: Vec<u64>,
    pub write_trials: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            out: PathBuf::from("results"),
            seed: 1,
            workers: 0,
            grid: Grid::default(),
            analysis: AnalysisSection::default(),
            monte_carlo: MonteCarloSection::default(),
        }
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid { variants: GameVariant::ALL.to_vec(), c: vec![7], s: vec![1, 5, 20, 50], mu: vec![0.1, 0.25, 0.5] }
    }
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let d = AnalysisOptions::default();
        AnalysisSection { k_max: d.k_max, ell: d.ell, n_max: d.n_max, beta: d.beta }
    }
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        let d = SimulationOptions::default();
        MonteCarloSection { trials: d.trials, horizon: d.horizon, cdf_points: d.cdf_points, write_trials: false }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    /// Checks everything up front and lists every problem found.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let g = &self.grid;
        for (name, empty) in [("grid.variants", g.variants.is_empty()), ("grid.c", g.c.is_empty()), ("grid.s", g.s.is_empty()), ("grid.mu", g.mu.is_empty())] {
            if empty {
                problems.push(format!("{name} is empty"));
            }
        }
        // An empty axis is already reported; a stand-in keeps the other axes checked.
        let or = |v: &Vec<usize>, d: usize| if v.is_empty() { vec![d] } else { v.clone() };
        let mus = if g.mu.is_empty() { vec![0.25] } else { g.mu.clone() };
        for c in or(&g.c, 7) {
            for s in or(&g.s, 1) {
                for &mu in &mus {
                    if let Err(urngame::Error::InvalidParams(list)) = GameParams::new(c, s, mu) {
                        for p in list {
                            let p = format!("grid: {p}");
                            if !problems.contains(&p) {
                                problems.push(p);
                            }
                        }
                    }
                }
            }
        }
        if self.analysis.ell == 0 {
            problems.push("analysis.ell must be at least 1".into());
        }
        if self.monte_carlo.trials == 0 {
            problems.push("monte_carlo.trials must be at least 1".into());
        }
        if self.monte_carlo.horizon == 0 {
            problems.push("monte_carlo.horizon must be at least 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(format!("invalid configuration: {}", problems.join("; "))))
        }
    }

    /// Cells in variant, c, s, mu order.
    pub fn cells(&self) -> Vec<Cell> {
        let g = &self.grid;
        let mut out = Vec::new();
        for &v in &g.variants {
            for &c in &g.c {
                for &s in &g.s {
                    for &mu in &g.mu {
                        out.push(Cell::new(v, c, s, mu));
                    }
                }
            }
        }
        out
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        let a = &self.analysis;
        AnalysisOptions { k_max: a.k_max, ell: a.ell, n_max: a.n_max, beta: a.beta }
    }

    pub fn simulation_options(&self) -> SimulationOptions {
        let m = &self.monte_carlo;
        SimulationOptions { trials: m.trials, horizon: m.horizon, seed: self.seed, cdf_points: m.cdf_points.clone() }
    }
}
