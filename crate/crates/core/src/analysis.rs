//! Exact metrics on the game chains.
//!
//! Hitting time of the polluted set, total time spent safe before the closed
//! polluted set is reached, stationary behaviour of the constrained chains and the
//! number of safe clusters among `ell` independent ones.

use crate::error::{Error, Result};
use crate::kernel::TransitionMatrix;
use crate::linalg::{dot, Lu, Matrix};
use crate::model::{class_indices, initial_distribution, Distribution, GameParams, StateClass};
use crate::scalar::{sum, Scalar};

/// Kernel blocks arranged by state class.
///
/// With `split_polluted` off the classes are `[Safe, Polluted]` (`A`, `B`);
/// with it on they are `[Safe, PollutedTransient, PollutedClosed]` (`A`, `C`, `D`).
#[derive(Debug, Clone)]
pub struct PartitionedChain<T> {
    params: GameParams<T>,
    full: Matrix<T>,
    initial: Vec<T>,
    classes: Vec<StateClass>,
    groups: Vec<Vec<usize>>,
    blocks: Vec<Vec<Matrix<T>>>,
    alpha: Vec<Vec<T>>,
}

impl<T: Scalar> PartitionedChain<T> {
    fn slot(&self, class: StateClass) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| *c == class)
            .ok_or_else(|| Error::Domain(format!("class {class:?} is not part of this partition")))
    }

    pub fn classes(&self) -> &[StateClass] {
        &self.classes
    }

    pub fn is_three_way(&self) -> bool {
        self.classes.len() == 3
    }

    pub fn params(&self) -> &GameParams<T> {
        &self.params
    }

    /// Flat indices of the states in `class`.
    pub fn indices(&self, class: StateClass) -> Result<&[usize]> {
        Ok(&self.groups[self.slot(class)?])
    }

    /// Transitions from states of `from` to states of `to`.
    pub fn block(&self, from: StateClass, to: StateClass) -> Result<&Matrix<T>> {
        Ok(&self.blocks[self.slot(from)?][self.slot(to)?])
    }

    /// Initial mass restricted to `class`.
    pub fn alpha(&self, class: StateClass) -> Result<&[T]> {
        Ok(&self.alpha[self.slot(class)?])
    }

    pub fn p_a(&self) -> &Matrix<T> {
        &self.blocks[0][0]
    }

    pub fn alpha_a(&self) -> &[T] {
        &self.alpha[0]
    }

    /// Puts the blocks back together in flat-index order.
    pub fn reassemble(&self) -> Matrix<T> {
        let n = self.full.rows();
        let mut m = Matrix::zeros(n, n);
        for (gi, rows) in self.groups.iter().enumerate() {
            for (gj, cols) in self.groups.iter().enumerate() {
                let b = &self.blocks[gi][gj];
                for (bi, &i) in rows.iter().enumerate() {
                    for (bj, &j) in cols.iter().enumerate() {
                        m[(i, j)] = b[(bi, bj)].clone();
                    }
                }
            }
        }
        m
    }

    /// Expected number of rounds before the closed set `D` is entered.
    pub fn expected_time_to_closed(&self) -> Result<T> {
        let d = self.slot(StateClass::PollutedClosed)?;
        let open: Vec<usize> = (0..self.full.rows()).filter(|i| !self.groups[d].contains(i)).collect();
        if open.is_empty() {
            return Ok(T::zero());
        }
        let block = self.full.submatrix(&open, &open);
        let start: Vec<T> = open.iter().map(|&i| self.initial[i].clone()).collect();
        let x = solve_fundamental(&block, &vec![T::one(); open.len()], "time to the closed polluted set")?;
        Ok(dot(&start, &x))
    }
}

/// Splits `P` by state class, attaching the initial distribution `alpha`.
pub fn partition<T: Scalar>(kernel: &TransitionMatrix<T>, split_polluted: bool) -> PartitionedChain<T> {
    let alpha = initial_distribution(kernel.params());
    partition_with(kernel, split_polluted, &alpha).expect("alpha has the kernel's dimension")
}

/// Like [`partition`] but with an arbitrary starting distribution.
pub fn partition_with<T: Scalar>(
    kernel: &TransitionMatrix<T>,
    split_polluted: bool,
    initial: &Distribution<T>,
) -> Result<PartitionedChain<T>> {
    if initial.len() != kernel.dimension() {
        return Err(Error::DimensionMismatch { expected: kernel.dimension(), found: initial.len() });
    }
    let params = kernel.params().clone();
    let classes = if split_polluted {
        vec![StateClass::Safe, StateClass::PollutedTransient, StateClass::PollutedClosed]
    } else {
        vec![StateClass::Safe, StateClass::Polluted]
    };
    let groups: Vec<Vec<usize>> = classes.iter().map(|&c| class_indices(&params, split_polluted, c)).collect();
    let p = kernel.matrix();
    let blocks = groups
        .iter()
        .map(|rows| groups.iter().map(|cols| p.submatrix(rows, cols)).collect())
        .collect();
    let init = initial.as_slice();
    let alpha = groups.iter().map(|g| g.iter().map(|&i| init[i].clone()).collect()).collect();
    Ok(PartitionedChain { params, full: p.clone(), initial: init.to_vec(), classes, groups, blocks, alpha })
}

/// Solves `(I - Q) x = rhs`, reporting a singular `I - Q` as a non-absorbing chain.
fn solve_fundamental<T: Scalar>(q: &Matrix<T>, rhs: &[T], context: &str) -> Result<Vec<T>> {
    let lu = Lu::factor(&q.identity_minus(), context).map_err(|e| match e {
        Error::Singular { pivot, .. } => Error::NonAbsorbing { context: format!("{context} (relative pivot {pivot:e})") },
        other => other,
    })?;
    let x = lu.solve(rhs);
    let threshold = T::singular_threshold();
    if !threshold.is_zero() {
        let bound = T::one() / threshold;
        if x.iter().any(|v| !v.to_f64_lossy().is_finite() || v.abs() > bound) {
            return Err(Error::NonAbsorbing { context: context.to_string() });
        }
    }
    Ok(x)
}

/// `[Pr{T <= 0}, ..., Pr{T <= k_max}]` with `Pr{T <= k} = 1 - alpha_A P_A^k 1`.
pub fn hitting_time_cdf<T: Scalar>(chain: &PartitionedChain<T>, k_max: usize) -> Vec<T> {
    let mut w = chain.alpha_a().to_vec();
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k > 0 {
            w = chain.p_a().left_mul(&w);
        }
        out.push(T::one() - sum(&w));
    }
    out
}

/// `E(T) = alpha_A (I - P_A)^{-1} 1`.
pub fn expected_hitting_time<T: Scalar>(chain: &PartitionedChain<T>) -> Result<T> {
    let a = chain.alpha_a();
    if a.is_empty() {
        return Ok(T::zero());
    }
    let x = solve_fundamental(chain.p_a(), &vec![T::one(); a.len()], "expected hitting time of the polluted set")?;
    Ok(dot(a, &x))
}

/// The pair `(v, G)` that reduces the alternation between `A` and `C` to a
/// sub-stochastic chain on `A` alone.
#[derive(Debug, Clone)]
pub struct SojournOperator<T> {
    pub v: Vec<T>,
    pub g: Matrix<T>,
}

impl<T: Scalar> SojournOperator<T> {
    pub fn max_row_sum(&self) -> f64 {
        self.g.row_sums().iter().map(|s| s.to_f64_lossy()).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.g.entries().map(|(_, _, v)| v.to_f64_lossy()).fold(f64::INFINITY, f64::min)
    }
}

/// `v = alpha_A + alpha_C (I - P_C)^{-1} P_CA`, `G = P_A + P_AC (I - P_C)^{-1} P_CA`.
pub fn sojourn_operator<T: Scalar>(chain: &PartitionedChain<T>) -> Result<SojournOperator<T>> {
    if !chain.is_three_way() {
        return Err(Error::Domain("sojourn operator needs the A/C/D partition".into()));
    }
    let (a, c) = (StateClass::Safe, StateClass::PollutedTransient);
    let p_c = chain.block(c, c)?;
    let mut v = chain.alpha(a)?.to_vec();
    let mut g = chain.block(a, a)?.clone();
    if p_c.rows() == 0 || v.is_empty() {
        return Ok(SojournOperator { v, g });
    }
    let context = "sojourn operator: I - P_C";
    let lu = Lu::factor(&p_c.identity_minus(), context).map_err(|e| match e {
        Error::Singular { .. } => Error::NonAbsorbing { context: context.into() },
        other => other,
    })?;
    let p_ca = chain.block(c, a)?;
    // (I - P_C)^{-1} P_CA
    let return_probs = lu.solve_matrix(p_ca);
    let alpha_c = chain.alpha(c)?;
    for (vi, add) in v.iter_mut().zip(return_probs.left_mul(alpha_c)) {
        *vi = vi.clone() + add;
    }
    g = g.add(&chain.block(a, c)?.matmul(&return_probs)?)?;
    Ok(SojournOperator { v, g })
}

/// `Pr{T_A <= k} = 1 - v G^k 1` for `k = 0..=k_max`.
pub fn sojourn_time_cdf<T: Scalar>(op: &SojournOperator<T>, k_max: usize) -> Vec<T> {
    let mut w = op.v.clone();
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k > 0 {
            w = op.g.left_mul(&w);
        }
        out.push(T::one() - sum(&w));
    }
    out
}

/// `E(T_A) = v (I - G)^{-1} 1`.
pub fn expected_sojourn<T: Scalar>(op: &SojournOperator<T>) -> Result<T> {
    if op.v.is_empty() {
        return Ok(T::zero());
    }
    let x = solve_fundamental(&op.g, &vec![T::one(); op.v.len()], "expected total safe time")?;
    Ok(dot(&op.v, &x))
}

fn check_ergodic<T: Scalar>(kernel: &TransitionMatrix<T>) -> Result<()> {
    match kernel.period() {
        None => Err(Error::Reducible(format!(
            "{} has closed or transient classes; no unique stationary law",
            kernel.variant()
        ))),
        Some(1) => Ok(()),
        Some(d) => Err(Error::Periodic(d)),
    }
}

/// Solves `pi = pi P`, `pi 1 = 1` with one balance equation replaced by the
/// normalization constraint.
pub fn stationary_distribution<T: Scalar>(kernel: &TransitionMatrix<T>) -> Result<Distribution<T>> {
    check_ergodic(kernel)?;
    let n = kernel.dimension();
    let mut system = kernel.matrix().identity_minus().transpose();
    for v in system.row_mut(n - 1) {
        *v = T::one();
    }
    let mut rhs = vec![T::zero(); n];
    rhs[n - 1] = T::one();
    let pi = Lu::factor(&system, "stationary system")?.solve(&rhs);
    Ok(Distribution::from_vec_unchecked(pi))
}

/// `max_j |(pi P)_j - pi_j|`.
pub fn stationary_residual<T: Scalar>(kernel: &TransitionMatrix<T>, pi: &[T]) -> f64 {
    let next = kernel.matrix().left_mul(pi);
    next.iter()
        .zip(pi)
        .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64_lossy())
        .fold(0.0, f64::max)
}

/// Iterates `w <- w P` until successive iterates differ by less than `tol`.
pub fn power_iteration<T: Scalar>(
    kernel: &TransitionMatrix<T>,
    start: &Distribution<T>,
    tol: f64,
    max_iter: usize,
) -> Result<(Distribution<T>, usize)> {
    check_ergodic(kernel)?;
    let mut w = start.as_slice().to_vec();
    for it in 1..=max_iter {
        let next = kernel.matrix().left_mul(&w);
        let delta = next
            .iter()
            .zip(&w)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64_lossy())
            .fold(0.0, f64::max);
        w = next;
        if delta < tol {
            return Ok((Distribution::from_vec_unchecked(w), it));
        }
    }
    Err(Error::Domain(format!("power iteration did not converge within {max_iter} steps")))
}

/// Long-run probability of a safe core: the binomial mass of `x <= c'`.
pub fn p_safe<T: Scalar>(params: &GameParams<T>) -> T {
    let c = params.c() as u64;
    (0..=params.c_prime() as u64).fold(T::zero(), |acc, x| acc + T::binomial_pmf(c, x, params.mu()))
}

/// Law of the number of safe clusters after `n` rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SafeClusterProcess<T> {
    /// `beta P^n 1_A`, the probability that a single cluster is safe.
    pub p_safe_n: T,
    /// `ell * p_safe_n`.
    pub expected: T,
    /// `Pr{N_n = k}` for `k = 0..=ell`.
    pub pmf: Vec<T>,
}

/// `[beta P^n 1_A for n in 0..=n_max]`.
pub fn safe_probability_series<T: Scalar>(
    kernel: &TransitionMatrix<T>,
    beta: &Distribution<T>,
    n_max: usize,
) -> Result<Vec<T>> {
    if beta.len() != kernel.dimension() {
        return Err(Error::DimensionMismatch { expected: kernel.dimension(), found: beta.len() });
    }
    let safe = class_indices(kernel.params(), false, StateClass::Safe);
    let mut w = beta.as_slice().to_vec();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            w = kernel.matrix().left_mul(&w);
        }
        out.push(safe.iter().fold(T::zero(), |acc, &i| acc + w[i].clone()));
    }
    Ok(out)
}

pub fn safe_cluster_process<T: Scalar>(
    kernel: &TransitionMatrix<T>,
    beta: &Distribution<T>,
    ell: usize,
    n: usize,
) -> Result<SafeClusterProcess<T>> {
    if ell == 0 {
        return Err(Error::Domain("number of clusters must be at least 1".into()));
    }
    let p = safe_probability_series(kernel, beta, n)?.pop().expect("series is non-empty");
    let expected = T::from_usize_exact(ell) * p.clone();
    let pmf = (0..=ell as u64).map(|k| T::binomial_pmf(ell as u64, k, &p)).collect();
    Ok(SafeClusterProcess { p_safe_n: p, expected, pmf })
}
