//! Urn model: parameters, the `(x, y)` state space, safe/polluted classes and the
//! initial distribution.
//!
//! A state `(x, y)` counts the red balls in the core urn `C` (capacity `c`) and in
//! the spare urn `S` (capacity `s`). States are flattened row-major with `x` as the
//! outer coordinate: `index(x, y) = x * (s + 1) + y`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar};

/// Urn capacities and red-ball proportion of the bag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameParams<T> {
    c: usize,
    s: usize,
    mu: T,
}

impl<T: Scalar> GameParams<T> {
    /// Validates `c >= 1`, `s >= 1` and `0 < mu < 1`. Every offending field is reported.
    pub fn new(c: usize, s: usize, mu: T) -> Result<Self> {
        let mut problems = Vec::new();
        if c == 0 {
            problems.push("c must be at least 1".to_string());
        }
        if s == 0 {
            problems.push("s must be at least 1".to_string());
        }
        if !(mu > T::zero() && mu < T::one()) {
            problems.push(format!("mu must lie in (0,1), got {:?}", mu));
        }
        if problems.is_empty() {
            Ok(GameParams { c, s, mu })
        } else {
            Err(Error::InvalidParams(problems))
        }
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn mu(&self) -> &T {
        &self.mu
    }

    /// Pollution threshold `floor((c - 1) / 3)`: a core with more red balls is polluted.
    pub fn c_prime(&self) -> usize {
        (self.c - 1) / 3
    }

    /// Number of states, `(c + 1)(s + 1)`.
    pub fn dimension(&self) -> usize {
        (self.c + 1) * (self.s + 1)
    }

    pub fn index(&self, state: GameState) -> Result<usize> {
        self.check(state)?;
        Ok(state.x * (self.s + 1) + state.y)
    }

    pub fn state(&self, index: usize) -> Result<GameState> {
        if index >= self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), found: index });
        }
        Ok(GameState { x: index / (self.s + 1), y: index % (self.s + 1) })
    }

    pub fn contains(&self, state: GameState) -> bool {
        state.x <= self.c && state.y <= self.s
    }

    fn check(&self, state: GameState) -> Result<()> {
        if self.contains(state) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { x: state.x, y: state.y, c: self.c, s: self.s })
        }
    }

    /// Converts the red proportion into another scalar type.
    pub fn map_scalar<U: Scalar>(&self, f: impl FnOnce(&T) -> U) -> Result<GameParams<U>> {
        GameParams::new(self.c, self.s, f(&self.mu))
    }
}

/// Red-ball counts `(x, y)` in urns `C` and `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GameState {
    pub x: usize,
    pub y: usize,
}

impl GameState {
    pub fn new(x: usize, y: usize) -> Self {
        GameState { x, y }
    }
}

impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateClass {
    /// Subset `A`: at most `c'` red balls in the core.
    Safe,
    /// Subset `C`: polluted, but enough white balls remain to renew back to safety.
    PollutedTransient,
    /// Subset `D`: polluted with `x + y >= s + c' + 1`.
    PollutedClosed,
    /// Subset `B = C ∪ D` when no split is requested.
    Polluted,
}

impl StateClass {
    pub fn is_safe(self) -> bool {
        self == StateClass::Safe
    }

    /// Collapses the three-way split back onto `{A, B}`.
    pub fn merged(self) -> StateClass {
        match self {
            StateClass::Safe => StateClass::Safe,
            _ => StateClass::Polluted,
        }
    }
}

/// All `(c+1)(s+1)` states in flat-index order.
pub fn enumerate_states<T: Scalar>(params: &GameParams<T>) -> Vec<GameState> {
    (0..=params.c())
        .flat_map(|x| (0..=params.s()).map(move |y| GameState { x, y }))
        .collect()
}

pub fn classify<T: Scalar>(state: GameState, params: &GameParams<T>, split_polluted: bool) -> Result<StateClass> {
    params.check(state)?;
    let cp = params.c_prime();
    Ok(if state.x <= cp {
        StateClass::Safe
    } else if !split_polluted {
        StateClass::Polluted
    } else if state.x + state.y > params.s() + cp {
        StateClass::PollutedClosed
    } else {
        StateClass::PollutedTransient
    })
}

/// Probability vector over the flat state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T> {
    probs: Vec<T>,
}

impl<T: Scalar> Distribution<T> {
    /// Accepts a vector whose entries are non-negative and sum to one within `tol`.
    pub fn new(probs: Vec<T>, tol: f64) -> Result<Self> {
        if let Some(i) = probs.iter().position(|p| p < &T::zero()) {
            return Err(Error::Domain(format!("negative probability at index {i}: {:?}", probs[i])));
        }
        let total = sum(&probs).to_f64_lossy();
        if (total - 1.0).abs() > tol {
            return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Distribution { probs })
    }

    /// Wraps a vector without checking it; used for intermediate results.
    pub(crate) fn from_vec_unchecked(probs: Vec<T>) -> Self {
        Distribution { probs }
    }

    pub fn point_mass(dimension: usize, index: usize) -> Result<Self> {
        if index >= dimension {
            return Err(Error::DimensionMismatch { expected: dimension, found: index });
        }
        let mut probs = vec![T::zero(); dimension];
        probs[index] = T::one();
        Ok(Distribution { probs })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> T {
        sum(&self.probs)
    }

    pub fn mass_on(&self, indices: &[usize]) -> T {
        indices.iter().fold(T::zero(), |acc, &i| acc + self.probs[i].clone())
    }

    /// `max_i |self_i - other_i|` in `f64`.
    pub fn max_abs_diff(&self, other: &[T]) -> f64 {
        self.probs
            .iter()
            .zip(other)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64_lossy())
            .fold(0.0, f64::max)
    }
}

/// Product of the binomial laws of the red counts in `C` and `S`.
pub fn initial_distribution<T: Scalar>(params: &GameParams<T>) -> Distribution<T> {
    let (c, s) = (params.c() as u64, params.s() as u64);
    let core: Vec<T> = (0..=c).map(|x| T::binomial_pmf(c, x, params.mu())).collect();
    let spare: Vec<T> = (0..=s).map(|y| T::binomial_pmf(s, y, params.mu())).collect();
    let probs = core
        .iter()
        .flat_map(|px| spare.iter().map(move |py| px.clone() * py.clone()))
        .collect();
    Distribution { probs }
}

/// Flat indices of the states in each class, in flat-index order.
/// Flat indices of the states in `class`, in state order.
pub fn class_indices_for<T: Scalar>(params: &GameParams<T>, class: StateClass) -> Vec<usize> {
    let split = matches!(class, StateClass::PollutedTransient | StateClass::PollutedClosed);
    class_indices(params, split, class)
}

pub(crate) fn class_indices<T: Scalar>(params: &GameParams<T>, split: bool, class: StateClass) -> Vec<usize> {
    enumerate_states(params)
        .into_iter()
        .enumerate()
        .filter(|(_, st)| classify(*st, params, split).map(|c| c == class).unwrap_or(false))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn p(c: usize, s: usize, mu: f64) -> GameParams<f64> {
        GameParams::new(c, s, mu).unwrap()
    }

    #[test]
    fn tiny_enumeration() {
        let states = enumerate_states(&p(1, 1, 0.5));
        let expect: Vec<_> = [(0, 0), (0, 1), (1, 0), (1, 1)].iter().map(|&(x, y)| GameState::new(x, y)).collect();
        assert_eq!(states, expect);
        assert_eq!(enumerate_states(&p(7, 10, 0.3)).len(), 88);
        assert_eq!(p(2, 3, 0.3).index(GameState::new(1, 2)).unwrap(), 6);
    }

    #[test]
    fn rejects_bad_params_listing_each_field() {
        match GameParams::new(0, 0, 1.0) {
            Err(Error::InvalidParams(v)) => assert_eq!(v.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(GameParams::new(3, 3, 0.0).is_err());
        assert!(GameParams::new(3, 3, 0.5).is_ok());
    }

    #[test]
    fn c_prime_values() {
        assert_eq!(p(1, 1, 0.5).c_prime(), 0);
        assert_eq!(p(4, 1, 0.5).c_prime(), 1);
        assert_eq!(p(7, 1, 0.5).c_prime(), 2);
        assert_eq!(p(10, 1, 0.5).c_prime(), 3);
    }

    #[test]
    fn classify_boundaries() {
        let pr = p(7, 10, 0.25);
        assert_eq!(classify(GameState::new(2, 0), &pr, false).unwrap(), StateClass::Safe);
        assert_eq!(classify(GameState::new(3, 0), &pr, false).unwrap(), StateClass::Polluted);
        assert_eq!(classify(GameState::new(3, 10), &pr, true).unwrap(), StateClass::PollutedClosed);
        assert_eq!(classify(GameState::new(3, 9), &pr, true).unwrap(), StateClass::PollutedTransient);
        assert!(matches!(classify(GameState::new(8, 0), &pr, false), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn initial_distribution_examples() {
        let a = initial_distribution(&p(1, 1, 0.5));
        assert!(a.as_slice().iter().all(|v| (v - 0.25).abs() < 1e-15));
        let a = initial_distribution(&p(2, 1, 0.25));
        assert!((a.as_slice()[0] - 0.421875).abs() < 1e-15);
    }

    #[test]
    fn exact_initial_distribution_sums_to_one() {
        let mu = BigRational::new(1.into(), 4.into());
        let pr = GameParams::new(4, 3, mu).unwrap();
        let a = initial_distribution(&pr);
        assert_eq!(a.total(), BigRational::from_integer(1.into()));
        assert_eq!(a.as_slice()[0], BigRational::new(2187.into(), 16384.into()));
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![0.5, 0.5], 1e-12).is_ok());
        assert!(Distribution::new(vec![0.5, 0.6], 1e-12).is_err());
        assert!(Distribution::new(vec![1.5, -0.5], 1e-12).is_err());
    }

    proptest! {
        #[test]
        fn index_round_trips(c in 1usize..12, s in 1usize..30, seed in 0usize..10_000) {
            let pr = p(c, s, 0.3);
            let i = seed % pr.dimension();
            let st = pr.state(i).unwrap();
            prop_assert_eq!(pr.index(st).unwrap(), i);
        }

        #[test]
        fn split_agrees_with_merge(c in 1usize..12, s in 1usize..20) {
            let pr = p(c, s, 0.3);
            for st in enumerate_states(&pr) {
                let split = classify(st, &pr, true).unwrap();
                let plain = classify(st, &pr, false).unwrap();
                prop_assert_eq!(split.merged(), plain);
                prop_assert!(split != StateClass::Polluted);
            }
        }

        #[test]
        fn alpha_is_product_of_binomials(c in 1usize..12, s in 1usize..40, mu in 0.01f64..0.99) {
            let pr = p(c, s, mu);
            let a = initial_distribution(&pr);
            prop_assert!((a.total() - 1.0).abs() < 1e-12);
            for x in 0..=c {
                let marginal: f64 = (0..=s).map(|y| a.as_slice()[pr.index(GameState::new(x, y)).unwrap()]).sum();
                let expect = f64::binomial_pmf(c as u64, x as u64, &mu);
                prop_assert!((marginal - expect).abs() < 1e-12);
            }
            for y in 0..=s {
                let marginal: f64 = (0..=c).map(|x| a.as_slice()[pr.index(GameState::new(x, y)).unwrap()]).sum();
                let expect = f64::binomial_pmf(s as u64, y as u64, &mu);
                prop_assert!((marginal - expect).abs() < 1e-12);
            }
        }
    }
}
