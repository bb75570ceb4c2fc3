//! Scalar abstraction shared by the model, kernel and analysis code.
//!
//! Everything that only needs field arithmetic is written against [`Scalar`], so the
//! same kernel builder and linear solver run in `f32`, `f64` or exact rationals.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Largest `n` for which binomial coefficients are computed exactly in integers
/// before being converted into a floating point scalar.
pub const EXACT_BINOMIAL_LIMIT: u64 = 60;

pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Relative pivot magnitude below which a factorization is declared singular.
    fn singular_threshold() -> Self;

    /// Whether a single step of iterative refinement pays off after a solve.
    const REFINE: bool;

    /// `n choose k`, zero when `k > n`.
    fn binomial(n: u64, k: u64) -> Self;

    /// `C(n,k) p^k (1-p)^(n-k)`.
    fn binomial_pmf(n: u64, k: u64, p: &Self) -> Self {
        if k > n {
            return Self::zero();
        }
        let q = Self::one() - p.clone();
        Self::binomial(n, k) * num_traits::pow(p.clone(), k as usize) * num_traits::pow(q, (n - k) as usize)
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

fn exact_binomial_u128(n: u64, k: u64) -> u128 {
    num_integer::binomial(n as u128, k as u128)
}

macro_rules! float_scalar {
    ($t:ty, $thresh:expr) => {
        impl Scalar for $t {
            fn singular_threshold() -> Self {
                $thresh
            }

            const REFINE: bool = true;

            fn binomial(n: u64, k: u64) -> Self {
                if k > n {
                    0.0
                } else if n <= EXACT_BINOMIAL_LIMIT {
                    exact_binomial_u128(n, k) as $t
                } else {
                    statrs::function::factorial::ln_binomial(n, k).exp() as $t
                }
            }

            fn binomial_pmf(n: u64, k: u64, p: &Self) -> Self {
                if k > n {
                    return 0.0;
                }
                if *p <= 0.0 || *p >= 1.0 {
                    let hit = if *p <= 0.0 { k == 0 } else { k == n };
                    return if hit { 1.0 } else { 0.0 };
                }
                if n <= EXACT_BINOMIAL_LIMIT {
                    return Self::binomial(n, k) * p.powi(k as i32) * (1.0 - *p).powi((n - k) as i32);
                }
                let p = *p as f64;
                let ln = statrs::function::factorial::ln_binomial(n, k)
                    + k as f64 * p.ln()
                    + (n - k) as f64 * (1.0 - p).ln();
                ln.exp() as $t
            }
        }
    };
}

float_scalar!(f64, 1e-13);
float_scalar!(f32, 1e-6);

impl Scalar for BigRational {
    fn singular_threshold() -> Self {
        BigRational::zero()
    }

    const REFINE: bool = false;

    fn binomial(n: u64, k: u64) -> Self {
        if k > n {
            return BigRational::zero();
        }
        let n = BigInt::from(n);
        let k = BigInt::from(k);
        BigRational::from_integer(num_integer::binomial(n, k))
    }
}

/// Ratio `num / den` of two small integers in the scalar type.
pub(crate) fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    T::from_usize_exact(num) / T::from_usize_exact(den)
}

pub(crate) fn abs_max<'a, T: Scalar + 'a>(values: impl IntoIterator<Item = &'a T>) -> T {
    values
        .into_iter()
        .map(|v| v.abs())
        .fold(T::zero(), |m, v| if v > m { v } else { m })
}

pub(crate) fn sum<'a, T: Scalar + 'a>(values: impl IntoIterator<Item = &'a T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_agree_across_scalars() {
        for n in 0..=40u64 {
            for k in 0..=n {
                let exact = BigRational::binomial(n, k).to_f64().unwrap();
                assert_eq!(f64::binomial(n, k), exact);
            }
        }
        assert_eq!(f64::binomial(3, 5), 0.0);
    }

    #[test]
    fn large_binomial_uses_log_path() {
        let v = f64::binomial(100, 50);
        let exact = BigRational::binomial(100, 50).to_f64().unwrap();
        assert!((v - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn pmf_log_path_matches_exact() {
        let p = 0.25;
        let mut total = 0.0;
        for k in 0..=120 {
            total += f64::binomial_pmf(120, k, &p);
        }
        assert!((total - 1.0).abs() < 1e-10);
        assert_eq!(f64::binomial_pmf(100, 100, &1.0), 1.0);
        assert_eq!(f64::binomial_pmf(100, 3, &0.0), 0.0);
    }
}
