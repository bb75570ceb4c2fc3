//! Seeded Monte Carlo runs of the raw urn games.
//!
//! Nothing here consults the kernels: a round draws an explicit ball from
//! `C ∪ S`, moves balls between urns as the game rule says and pulls fresh balls
//! from an infinite Bernoulli(`mu`) bag. That keeps the simulator usable as an
//! independent check on the exact analysis.
//!
//! Randomness: every trial owns a `ChaCha8Rng` seeded with the master seed and
//! switched to stream `trial_index`, so trial `i` is bit-reproducible no matter how
//! trials are scheduled across threads.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{Adversary, Game, GameVariant};
use crate::model::{classify, GameParams, GameState, StateClass};

/// Default censoring horizon in rounds.
pub const DEFAULT_HORIZON: u64 = 1_000_000;

/// Red counts in both urns; the urns themselves always hold exactly `c` and `s` balls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UrnConfiguration {
    pub red_core: usize,
    pub red_spare: usize,
    pub params: GameParams<f64>,
}

impl UrnConfiguration {
    pub fn new(state: GameState, params: GameParams<f64>) -> Result<Self> {
        if !params.contains(state) {
            return Err(Error::OutOfBounds { x: state.x, y: state.y, c: params.c(), s: params.s() });
        }
        Ok(UrnConfiguration { red_core: state.x, red_spare: state.y, params })
    }

    /// Fills both urns with fresh bag draws.
    pub fn sample_initial(params: GameParams<f64>, rng: &mut impl Rng) -> Self {
        let mu = *params.mu();
        let red_core = (0..params.c()).filter(|_| rng.gen_bool(mu)).count();
        let red_spare = (0..params.s()).filter(|_| rng.gen_bool(mu)).count();
        UrnConfiguration { red_core, red_spare, params }
    }

    pub fn state(&self) -> GameState {
        GameState::new(self.red_core, self.red_spare)
    }

    fn class(&self) -> StateClass {
        classify(self.state(), &self.params, true).expect("configuration stays in bounds")
    }
}

/// Draws `count` balls without replacement from `total` balls of which `red` are red
/// and returns how many red ones were drawn.
fn draw_without_replacement(rng: &mut impl Rng, total: usize, red: usize, count: usize) -> usize {
    let (mut left, mut red_left, mut drawn_red) = (total, red, 0);
    for _ in 0..count {
        if rng.gen_range(0..left) < red_left {
            red_left -= 1;
            drawn_red += 1;
        }
        left -= 1;
    }
    drawn_red
}

/// Applies one round of the game rule.
pub fn simulate_round(cfg: &UrnConfiguration, variant: GameVariant, rng: &mut impl Rng) -> UrnConfiguration {
    let (c, s) = (cfg.params.c(), cfg.params.s());
    let mu = *cfg.params.mu();
    let (mut x, mut y) = (cfg.red_core, cfg.red_spare);

    // Stage 1: b0 is uniform over the c + s balls; C's balls come first.
    let pick = rng.gen_range(0..c + s);
    let from_core = pick < c;
    let red = if from_core { pick < x } else { pick - c < y };
    if red && variant.adversary == Adversary::Unconstrained {
        return *cfg;
    }

    // Stage 2: b0 goes back to the bag.
    if from_core {
        if red {
            x -= 1;
        }
        match variant.game {
            Game::One => {
                // b1 moves from S into C.
                if rng.gen_range(0..s) < y {
                    y -= 1;
                    x += 1;
                }
            }
            Game::Two => {
                // Pool the c - 1 core balls with the s spares and redraw a core of c.
                let pool_red = x + y;
                x = draw_without_replacement(rng, c + s - 1, pool_red, c);
                y = pool_red - x;
            }
        }
    } else if red {
        y -= 1;
    }
    // b2 refills S from the bag.
    if rng.gen_bool(mu) {
        y += 1;
    }
    UrnConfiguration { red_core: x, red_spare: y, params: cfg.params }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    Fixed(GameState),
    /// Draw the initial urn contents from the bag.
    SampleInitial,
}

/// When a trial stops before its horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Absorption of the variant: `B` for game 1 and `D` for game 2 against an
    /// unconstrained adversary; never for constrained variants.
    Absorption,
    /// First entry into the polluted set `B`, whatever the variant.
    FirstPollution,
    /// Always run to the horizon.
    Horizon,
}

/// Per-trial seed: a master seed plus the trial's stream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeed {
    pub master: u64,
    pub index: u64,
}

impl From<u64> for TrialSeed {
    fn from(master: u64) -> Self {
        TrialSeed { master, index: 0 }
    }
}

impl TrialSeed {
    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.index);
        rng
    }
}

/// Number of time indices `n` spent in each class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassVisits {
    pub safe: u64,
    pub polluted_transient: u64,
    pub polluted_closed: u64,
}

impl ClassVisits {
    fn record(&mut self, class: StateClass) {
        match class {
            StateClass::Safe => self.safe += 1,
            StateClass::PollutedTransient => self.polluted_transient += 1,
            _ => self.polluted_closed += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.safe + self.polluted_transient + self.polluted_closed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// First `n` with `X_n` polluted; `None` if it did not happen before the trial ended.
    pub hitting_time: Option<u64>,
    /// First `n` with `X_n` in the closed set `D`.
    pub closed_time: Option<u64>,
    /// Number of `n` with `X_n` safe, counted up to (excluding) the stopping time.
    pub total_safe_time: u64,
    /// Rounds actually played.
    pub rounds: u64,
    /// The stop rule did not fire before the horizon.
    pub censored: bool,
    /// Visits over `n = 0..=rounds`.
    pub visits: ClassVisits,
    pub final_state: GameState,
}

fn stop_class(variant: GameVariant, rule: StopRule) -> Option<fn(StateClass) -> bool> {
    match (rule, variant.adversary, variant.game) {
        (StopRule::Horizon, _, _) | (StopRule::Absorption, Adversary::Constrained, _) => None,
        (StopRule::FirstPollution, _, _) | (StopRule::Absorption, Adversary::Unconstrained, Game::One) => {
            Some(|c| !c.is_safe())
        }
        (StopRule::Absorption, Adversary::Unconstrained, Game::Two) => Some(|c| c == StateClass::PollutedClosed),
    }
}

/// Plays one game from `start` until the stop rule fires or `horizon` rounds are played.
pub fn run_trial(
    variant: GameVariant,
    params: &GameParams<f64>,
    start: Start,
    horizon: u64,
    stop: StopRule,
    seed: TrialSeed,
) -> Result<TrialResult> {
    if horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let mut rng = seed.rng();
    let mut cfg = match start {
        Start::Fixed(state) => UrnConfiguration::new(state, *params)?,
        Start::SampleInitial => UrnConfiguration::sample_initial(*params, &mut rng),
    };
    let stops = stop_class(variant, stop);
    let mut visits = ClassVisits::default();
    let mut hitting_time = None;
    let mut closed_time = None;
    let mut safe_time = 0;
    let mut n = 0u64;
    loop {
        let class = cfg.class();
        visits.record(class);
        if hitting_time.is_none() && !class.is_safe() {
            hitting_time = Some(n);
        }
        if closed_time.is_none() && class == StateClass::PollutedClosed {
            closed_time = Some(n);
        }
        if stops.is_some_and(|f| f(class)) {
            return Ok(TrialResult {
                hitting_time,
                closed_time,
                total_safe_time: safe_time,
                rounds: n,
                censored: false,
                visits,
                final_state: cfg.state(),
            });
        }
        if class.is_safe() {
            safe_time += 1;
        }
        if n == horizon {
            return Ok(TrialResult {
                hitting_time,
                closed_time,
                total_safe_time: safe_time,
                rounds: n,
                censored: stops.is_some(),
                visits,
                final_state: cfg.state(),
            });
        }
        cfg = simulate_round(&cfg, variant, &mut rng);
        n += 1;
    }
}

/// Sample mean of the uncensored values with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    /// Uncensored samples behind `mean`.
    pub samples: u64,
    pub censored: u64,
    /// Set when censored trials exist, so `mean` underestimates the true value.
    pub lower_bound: bool,
}

impl Estimate {
    fn from_samples(values: &[u64], censored: u64, horizon: u64) -> Self {
        if values.is_empty() {
            return Estimate { mean: horizon as f64, stderr: 0.0, samples: 0, censored, lower_bound: true };
        }
        let n = values.len() as f64;
        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
        let stderr = if values.len() > 1 {
            let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Estimate { mean, stderr, samples: values.len() as u64, censored, lower_bound: censored > 0 }
    }

    /// `(mean - exact) / stderr`, zero when both the error and the stderr vanish.
    pub fn z_score(&self, exact: f64) -> f64 {
        z_score(self.mean, exact, self.stderr)
    }
}

pub fn z_score(estimate: f64, exact: f64, stderr: f64) -> f64 {
    let diff = estimate - exact;
    if diff == 0.0 {
        0.0
    } else if stderr == 0.0 {
        f64::INFINITY.copysign(diff)
    } else {
        diff / stderr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub horizon: u64,
    pub master_seed: u64,
    pub stop: StopRule,
    pub start: Start,
}

impl MonteCarloConfig {
    pub fn new(trials: u64, master_seed: u64) -> Self {
        MonteCarloConfig {
            trials,
            horizon: DEFAULT_HORIZON,
            master_seed,
            stop: StopRule::Absorption,
            start: Start::SampleInitial,
        }
    }
}

/// Aggregate over independent trials.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub trials: u64,
    pub hitting_time: Estimate,
    pub safe_time: Estimate,
    /// Uncensored hitting times and how often each occurred.
    pub hitting_histogram: BTreeMap<u64, u64>,
    /// Total safe times of trials whose stop rule fired.
    pub safe_time_histogram: BTreeMap<u64, u64>,
}

fn empirical_cdf(hist: &BTreeMap<u64, u64>, trials: u64, k: u64) -> f64 {
    hist.range(..=k).map(|(_, n)| *n).sum::<u64>() as f64 / trials as f64
}

impl MonteCarloEstimate {
    /// Fraction of all trials with hitting time `<= k`.
    pub fn hitting_cdf(&self, k: u64) -> f64 {
        empirical_cdf(&self.hitting_histogram, self.trials, k)
    }

    /// Fraction of all trials with total safe time `<= k`.
    pub fn safe_time_cdf(&self, k: u64) -> f64 {
        empirical_cdf(&self.safe_time_histogram, self.trials, k)
    }
}

/// Binomial standard error of an empirical probability with exact value `p`.
pub fn binomial_stderr(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Runs `config.trials` independent trials in parallel and aggregates them in
/// trial order.
pub fn estimate_metrics(
    variant: GameVariant,
    params: &GameParams<f64>,
    config: &MonteCarloConfig,
) -> Result<MonteCarloEstimate> {
    if config.trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let results: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|index| {
            let seed = TrialSeed { master: config.master_seed, index };
            run_trial(variant, params, config.start, config.horizon, config.stop, seed)
        })
        .collect::<Result<_>>()?;
    Ok(aggregate(&results, config.horizon))
}

/// Deterministic reduction of trial results.
pub fn aggregate(results: &[TrialResult], horizon: u64) -> MonteCarloEstimate {
    let mut hitting = Vec::new();
    let mut hitting_histogram = BTreeMap::new();
    let mut safe = Vec::new();
    let mut safe_time_histogram = BTreeMap::new();
    for r in results {
        if let Some(t) = r.hitting_time {
            hitting.push(t);
            *hitting_histogram.entry(t).or_insert(0) += 1;
        }
        if !r.censored {
            safe.push(r.total_safe_time);
            *safe_time_histogram.entry(r.total_safe_time).or_insert(0) += 1;
        }
    }
    let trials = results.len() as u64;
    MonteCarloEstimate {
        trials,
        hitting_time: Estimate::from_samples(&hitting, trials - hitting.len() as u64, horizon),
        safe_time: Estimate::from_samples(&safe, trials - safe.len() as u64, horizon),
        hitting_histogram,
        safe_time_histogram,
    }
}
