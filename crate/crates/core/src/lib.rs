//! Join/leave urn games for cluster-based overlays.
//!
//! The crate builds the exact one-round kernels of both core-maintenance games
//! against an unconstrained or a lifetime-constrained adversary, derives hitting
//! and sojourn metrics from them, and cross-checks everything with a Monte Carlo
//! simulation of the raw games. The [`incarnation`] module implements the
//! certificate-based identifier lifetime that makes the constrained adversary
//! enforceable.
//!
//! Math is generic over [`Scalar`]; the aliases below fix it to `f64` or to exact
//! rationals.
//!
//! ```
//! use urngame::analysis::{expected_hitting_time, partition};
//! use urngame::{build_kernel, GameVariant, Params};
//!
//! let params = Params::new(7, 5, 0.25)?;
//! let kernel = build_kernel(GameVariant::GAME1_UNCONSTRAINED, &params);
//! let et = expected_hitting_time(&partition(&kernel, false))?;
//! assert!((et - 8.8656).abs() < 1e-4);
//! # Ok::<(), urngame::Error>(())
//! ```

pub mod analysis;
pub mod error;
pub mod export;
pub mod incarnation;
pub mod kernel;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use kernel::{build_kernel, hypergeometric_q, kernel_diff, printed_kernel, Adversary, EntryDiff, Game, GameVariant};
pub use model::{classify, enumerate_states, initial_distribution, GameState, StateClass};
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type Params = model::GameParams<f64>;
pub type ExactParams = model::GameParams<Exact>;
pub type Kernel = kernel::TransitionMatrix<f64>;
pub type ExactKernel = kernel::TransitionMatrix<Exact>;
pub type Distribution = model::Distribution<f64>;
pub type ExactDistribution = model::Distribution<Exact>;
