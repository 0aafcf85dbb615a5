//! Exact field arithmetic: rationals, cyclotomic extensions `Q(zeta_N)`, and an
//! optional prime-field backend, plus the polynomial utilities used by the
//! idempotent-extraction machinery.

mod cyclotomic;
mod poly;
mod prime;

pub use cyclotomic::{cyclotomic_polynomial, euler_phi, CyclotomicScalar};
pub use poly::{poly_crt_split, Polynomial};
pub use prime::{set_default_prime, validate_prime_backend, PrimeFieldScalar};

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use thiserror::Error;

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator (both guaranteed by `num_rational`).
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("conductor {requested} exceeds the configured bound {bound}")]
    ConductorOverflow { requested: u64, bound: u64 },
    #[error("field has no primitive root of unity of order {order} (modulus {modulus})")]
    InsufficientRoots { order: u64, modulus: u64 },
    #[error("denominator vanishes modulo {modulus}")]
    DenominatorVanishes { modulus: u64 },
}

static CONDUCTOR_MAX: AtomicU64 = AtomicU64::new(10_000);

/// Configurable bound on cyclotomic conductors; gates creation of roots of
/// unity and of `Phi_N`, not arithmetic on already-admitted values.
pub fn conductor_max() -> u64 {
    CONDUCTOR_MAX.load(Ordering::Relaxed)
}

pub fn set_conductor_max(bound: u64) {
    CONDUCTOR_MAX.store(bound, Ordering::Relaxed);
}

/// Exact field scalar. All operations are pure; values are immutable and
/// safe to share between threads.
pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool {
        *self == Self::one()
    }
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn inv(&self) -> Result<Self, ScalarError>;
    fn div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul(&rhs.inv()?))
    }
    fn from_rational(q: &Rational) -> Result<Self, ScalarError>;
    fn from_int(n: i64) -> Self {
        Self::from_rational(&rat_int(n)).expect("integers embed in every backend")
    }
    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

/// Scalars providing primitive roots of unity, as required by the character
/// and block-normalization machinery.
pub trait RootScalar: Scalar {
    /// Returns `zeta_order^k` for a fixed primitive `order`-th root of unity.
    fn root_of_unity(order: u64, k: i64) -> Result<Self, ScalarError>;
}

impl Scalar for Rational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn inv(&self) -> Result<Self, ScalarError> {
        if Scalar::is_zero(self) {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::one() / self)
    }
    fn from_rational(q: &Rational) -> Result<Self, ScalarError> {
        Ok(q.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arith() {
        let a = rat(1, 2);
        let b = rat(1, 3);
        assert_eq!(a.add(&b), rat(5, 6));
        assert_eq!(rat(2, 4), rat(1, 2));
        assert!(Scalar::is_zero(&rat(0, 5)));
        assert_eq!(rat(3, 7).inv().unwrap(), rat(7, 3));
        assert_eq!(
            Scalar::inv(&rat(0, 1)),
            Err(ScalarError::DivisionByZero)
        );
    }
}
