//! Optional prime-field backend `F_p`.
//!
//! Valid for a session with conductor `N` and algebra dimension `d` only when
//! `p = 1 (mod N)` (so every needed root of unity exists) and `p > d` (so the
//! radical of the graded algebra stays graded); `validate_prime_backend`
//! enforces both at load time.

use std::fmt;

use num_traits::ToPrimitive;

use super::{Rational, RootScalar, Scalar, ScalarError};

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PrimeFieldScalar {
    modulus: u64,
    residue: u64,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Accepts the backend only under the session preconditions.
pub fn validate_prime_backend(p: u64, conductor: u64, algebra_dim: usize) -> Result<(), String> {
    if !is_prime(p) {
        return Err(format!("{p} is not prime"));
    }
    if conductor > 1 && p % conductor != 1 {
        return Err(format!(
            "p = {p} is not congruent to 1 mod the session conductor {conductor}"
        ));
    }
    if p <= algebra_dim as u64 {
        return Err(format!(
            "p = {p} does not exceed dim I(X) = {algebra_dim}"
        ));
    }
    Ok(())
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn factor(mut n: u64) -> Vec<u64> {
    let mut fs = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            fs.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        fs.push(n);
    }
    fs
}

/// Smallest primitive root mod p (deterministic).
fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = factor(p - 1);
    'cand: for g in 2..p {
        for q in &factors {
            if pow_mod(g, (p - 1) / q, p) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!("every prime has a primitive root")
}

impl PrimeFieldScalar {
    pub fn new(modulus: u64, value: i64) -> Self {
        debug_assert!(is_prime(modulus));
        PrimeFieldScalar {
            modulus,
            residue: value.rem_euclid(modulus as i64) as u64,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }
}

// The zero and one of F_p need a modulus; a thread-local default keeps the
// Scalar constructors usable. Set it once per session before computing.
thread_local! {
    static DEFAULT_MODULUS: std::cell::Cell<u64> = const { std::cell::Cell::new(2) };
}

pub fn set_default_prime(p: u64) {
    assert!(is_prime(p), "default modulus must be prime");
    DEFAULT_MODULUS.with(|m| m.set(p));
}

fn default_prime() -> u64 {
    DEFAULT_MODULUS.with(|m| m.get())
}

impl PrimeFieldScalar {
    fn align(&self, rhs: &Self) -> u64 {
        assert_eq!(
            self.modulus, rhs.modulus,
            "mixed prime-field moduli in one computation"
        );
        self.modulus
    }
}

impl fmt::Debug for PrimeFieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.residue, self.modulus)
    }
}

impl fmt::Display for PrimeFieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.residue)
    }
}

impl Scalar for PrimeFieldScalar {
    fn zero() -> Self {
        PrimeFieldScalar::new(default_prime(), 0)
    }

    fn one() -> Self {
        PrimeFieldScalar::new(default_prime(), 1)
    }

    fn is_zero(&self) -> bool {
        self.residue == 0
    }

    fn add(&self, rhs: &Self) -> Self {
        let p = self.align(rhs);
        PrimeFieldScalar {
            modulus: p,
            residue: (self.residue + rhs.residue) % p,
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        let p = self.align(rhs);
        PrimeFieldScalar {
            modulus: p,
            residue: (self.residue + p - rhs.residue) % p,
        }
    }

    fn neg(&self) -> Self {
        PrimeFieldScalar {
            modulus: self.modulus,
            residue: (self.modulus - self.residue) % self.modulus,
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let p = self.align(rhs);
        PrimeFieldScalar {
            modulus: p,
            residue: self.residue * rhs.residue % p,
        }
    }

    fn inv(&self) -> Result<Self, ScalarError> {
        if self.residue == 0 {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(PrimeFieldScalar {
            modulus: self.modulus,
            residue: pow_mod(self.residue, self.modulus - 2, self.modulus),
        })
    }

    fn from_rational(q: &Rational) -> Result<Self, ScalarError> {
        let p = default_prime();
        let p_big = num_bigint::BigInt::from(p);
        let num = ((q.numer() % &p_big) + &p_big) % &p_big;
        let den = ((q.denom() % &p_big) + &p_big) % &p_big;
        let den = den.to_u64().unwrap();
        if den == 0 {
            return Err(ScalarError::DenominatorVanishes { modulus: p });
        }
        let num = PrimeFieldScalar {
            modulus: p,
            residue: num.to_u64().unwrap(),
        };
        num.div(&PrimeFieldScalar {
            modulus: p,
            residue: den,
        })
    }
}

impl RootScalar for PrimeFieldScalar {
    fn root_of_unity(order: u64, k: i64) -> Result<Self, ScalarError> {
        let p = default_prime();
        if order == 0 || (p - 1) % order != 0 {
            return Err(ScalarError::InsufficientRoots { order, modulus: p });
        }
        let g = primitive_root(p);
        let zeta = pow_mod(g, (p - 1) / order, p);
        let k = k.rem_euclid(order as i64) as u64;
        Ok(PrimeFieldScalar {
            modulus: p,
            residue: pow_mod(zeta, k, p),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backend_validation() {
        assert!(validate_prime_backend(13, 4, 6).is_ok());
        assert!(validate_prime_backend(12, 4, 6).is_err());
        assert!(validate_prime_backend(7, 4, 6).is_err(), "7 != 1 mod 4");
        assert!(validate_prime_backend(5, 4, 6).is_err(), "5 <= dim");
    }

    #[test]
    fn field_ops_mod_13() {
        set_default_prime(13);
        let a = PrimeFieldScalar::new(13, 7);
        let b = PrimeFieldScalar::new(13, 9);
        assert_eq!(a.add(&b).residue(), 3);
        assert_eq!(a.mul(&b).residue(), 63 % 13);
        assert!(Scalar::is_one(&a.mul(&a.inv().unwrap())));
    }

    #[test]
    fn roots_of_unity_mod_13() {
        set_default_prime(13);
        let z = PrimeFieldScalar::root_of_unity(4, 1).unwrap();
        assert!(Scalar::is_one(&z.pow(4)));
        assert!(!Scalar::is_one(&z.pow(2)));
        assert!(matches!(
            PrimeFieldScalar::root_of_unity(5, 1),
            Err(ScalarError::InsufficientRoots { .. })
        ));
    }
}
