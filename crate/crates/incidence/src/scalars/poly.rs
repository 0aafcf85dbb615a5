//! Dense univariate polynomials over an exact field.

use std::fmt;

use super::{rat_int, Rational, Scalar, ScalarError};

/// Polynomial with ascending coefficients; trailing zeros are trimmed, so the
/// leading coefficient is nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<S: Scalar = Rational> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Polynomial::new(vec![S::one()])
    }

    pub fn constant(c: S) -> Self {
        Polynomial::new(vec![c])
    }

    /// `x^n`
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![S::zero(); n + 1];
        coeffs[n] = S::one();
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> S {
        self.coeffs.get(i).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the zero polynomial is `None`.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).add(&rhs.coeff(i))).collect();
        Polynomial::new(coeffs)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).sub(&rhs.coeff(i))).collect();
        Polynomial::new(coeffs)
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c.mul(s)).collect())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![S::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Polynomial::new(coeffs)
    }

    /// Euclidean division: `self = q * rhs + r` with `deg r < deg rhs`.
    pub fn div_rem(&self, rhs: &Self) -> Result<(Self, Self), ScalarError> {
        if rhs.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let d = rhs.degree().unwrap();
        let lead_inv = rhs.coeffs[d].inv()?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![S::zero(); self.coeffs.len().saturating_sub(d)];
        while rem.len() > d {
            let k = rem.len() - 1;
            let c = rem[k].mul(&lead_inv);
            if !c.is_zero() {
                quot[k - d] = c.clone();
                for i in 0..=d {
                    rem[k - d + i] = rem[k - d + i].sub(&c.mul(&rhs.coeffs[i]));
                }
            }
            rem.pop();
        }
        Ok((Polynomial::new(quot), Polynomial::new(rem)))
    }

    pub fn rem(&self, rhs: &Self) -> Result<Self, ScalarError> {
        Ok(self.div_rem(rhs)?.1)
    }

    /// Exact division; panics if the remainder is nonzero (internal misuse).
    pub fn div_exact(&self, rhs: &Self) -> Result<Self, ScalarError> {
        let (q, r) = self.div_rem(rhs)?;
        assert!(r.is_zero(), "polynomial division was not exact");
        Ok(q)
    }

    /// Extended gcd: returns `(g, a, b)` with `a*self + b*rhs = g`, `g` monic
    /// unless zero.
    pub fn extended_gcd(&self, rhs: &Self) -> Result<(Self, Self, Self), ScalarError> {
        let mut r0 = self.clone();
        let mut r1 = rhs.clone();
        let (mut a0, mut a1) = (Polynomial::one(), Polynomial::zero());
        let (mut b0, mut b1) = (Polynomial::zero(), Polynomial::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1)?;
            let a = a0.sub(&q.mul(&a1));
            let b = b0.sub(&q.mul(&b1));
            r0 = r1;
            r1 = r;
            a0 = a1;
            a1 = a;
            b0 = b1;
            b1 = b;
        }
        if let Some(d) = r0.degree() {
            let lead_inv = r0.coeffs[d].inv()?;
            r0 = r0.scale(&lead_inv);
            a0 = a0.scale(&lead_inv);
            b0 = b0.scale(&lead_inv);
        }
        Ok((r0, a0, b0))
    }

    pub fn eval(&self, x: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }
}

impl Polynomial<Rational> {
    /// Re-coefficients a rational polynomial into any scalar backend.
    pub fn into_scalar<S: Scalar>(&self) -> Result<Polynomial<S>, ScalarError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(S::from_rational)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Polynomial::new(coeffs))
    }
}

impl<S: Scalar> fmt::Display for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "x^{i}")?;
            } else {
                write!(f, "({c})*x^{i}")?;
            }
        }
        Ok(())
    }
}

/// The unique polynomial `e` of degree `< 2m` with `e = 0 mod x^m` and
/// `e = 1 mod (x-1)^m`, computed by extended gcd of the two moduli.
/// Evaluating it at `y = f + b` (`f` idempotent, `b` nilpotent of index at
/// most `m` commuting suitably) projects onto the generalized 1-eigenspace,
/// so `e(y)` is idempotent and `e(0) = 0` kills the constant term.
pub fn poly_crt_split(m: usize) -> Polynomial<Rational> {
    assert!(m >= 1, "poly_crt_split requires m >= 1");
    let xm = Polynomial::<Rational>::monomial(m);
    // (x-1)^m
    let xm1 = {
        let base = Polynomial::new(vec![rat_int(-1), rat_int(1)]);
        let mut acc = Polynomial::one();
        for _ in 0..m {
            acc = acc.mul(&base);
        }
        acc
    };
    let (g, a, _b) = xm.extended_gcd(&xm1).expect("coprime moduli");
    assert_eq!(g, Polynomial::one(), "x^m and (x-1)^m are coprime");
    // e = a*x^m, reduced mod x^m (x-1)^m so deg e < 2m.
    let e = a.mul(&xm);
    e.rem(&xm.mul(&xm1)).expect("nonzero modulus")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rat;

    fn p(coeffs: &[i64]) -> Polynomial<Rational> {
        Polynomial::new(coeffs.iter().map(|&c| rat_int(c)).collect())
    }

    #[test]
    fn div_rem_roundtrip() {
        let a = p(&[1, 0, 3, 2]);
        let b = p(&[1, 1]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree() < b.degree());
    }

    #[test]
    fn crt_split_small_cases() {
        assert_eq!(poly_crt_split(1), p(&[0, 1]));
        // 3x^2 - 2x^3
        assert_eq!(poly_crt_split(2), p(&[0, 0, 3, -2]));
        // 10x^3 - 15x^4 + 6x^5
        assert_eq!(poly_crt_split(3), p(&[0, 0, 0, 10, -15, 6]));
    }

    #[test]
    fn crt_split_congruences() {
        for m in 1..=6usize {
            let e = poly_crt_split(m);
            assert_eq!(e.coeff(0), rat_int(0));
            assert!(e.degree().unwrap() < 2 * m);
            let xm = Polynomial::<Rational>::monomial(m);
            assert!(e.rem(&xm).unwrap().is_zero());
            let mut xm1 = Polynomial::one();
            let base = p(&[-1, 1]);
            for _ in 0..m {
                xm1 = xm1.mul(&base);
            }
            assert_eq!(e.sub(&Polynomial::one()).rem(&xm1).unwrap(), Polynomial::zero());
        }
    }

    #[test]
    fn extended_gcd_bezout() {
        let a = p(&[2, 3, 1]); // (x+1)(x+2)
        let b = p(&[3, 4, 1]); // (x+1)(x+3)
        let (g, s, t) = a.extended_gcd(&b).unwrap();
        assert_eq!(g, p(&[1, 1]));
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
        let half = Polynomial::constant(rat(1, 2));
        let _ = half;
    }
}
