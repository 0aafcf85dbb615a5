//! Elements of `Q(zeta_N)` represented as residues in `Q[x]/(Phi_N(x))`.
//!
//! Each value carries its own conductor; binary operations lift both operands
//! into the lcm conductor first, so mixed-conductor comparisons are always
//! performed in a common field. The configurable conductor bound gates the
//! creation of roots of unity and of `Phi_N` (the only places new conductors
//! enter a computation), not arithmetic closure.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use num_integer::Integer;
use once_cell::sync::Lazy;

use super::poly::Polynomial;
use super::{conductor_max, rat_int, Rational, RootScalar, Scalar, ScalarError};

pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1);
    let mut phi = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            phi = phi / p * (p - 1);
        }
        p += 1;
    }
    if m > 1 {
        phi = phi / m * (m - 1);
    }
    phi
}

fn divisors(n: u64) -> Vec<u64> {
    let mut ds = Vec::new();
    for d in 1..=n {
        if d * d > n {
            break;
        }
        if n % d == 0 {
            ds.push(d);
            if d != n / d {
                ds.push(n / d);
            }
        }
    }
    ds.sort_unstable();
    ds
}

static PHI_CACHE: Lazy<Mutex<BTreeMap<u64, Polynomial<Rational>>>> =
    Lazy::new(|| Mutex::new(BTreeMap::new()));

/// The N-th cyclotomic polynomial, by exact division of `x^N - 1` by the
/// product of `Phi_d` over proper divisors `d | N`.
pub fn cyclotomic_polynomial(n: u64) -> Result<Polynomial<Rational>, ScalarError> {
    assert!(n >= 1);
    if n > conductor_max() {
        return Err(ScalarError::ConductorOverflow {
            requested: n,
            bound: conductor_max(),
        });
    }
    if let Some(p) = PHI_CACHE.lock().unwrap().get(&n) {
        return Ok(p.clone());
    }
    let mut denom = Polynomial::<Rational>::one();
    for d in divisors(n) {
        if d == n {
            continue;
        }
        denom = denom.mul(&cyclotomic_polynomial(d)?);
    }
    let mut xn1 = Polynomial::<Rational>::monomial(n as usize);
    xn1 = xn1.sub(&Polynomial::one());
    let phi = xn1.div_exact(&denom)?;
    PHI_CACHE.lock().unwrap().insert(n, phi.clone());
    Ok(phi)
}

/// Exact element of `Q(zeta_N)`: `coeffs` has length `phi(N)` and holds the
/// residue of a polynomial in `zeta_N` modulo `Phi_N`.
#[derive(Clone)]
pub struct CyclotomicScalar {
    conductor: u64,
    coeffs: Vec<Rational>,
}

impl CyclotomicScalar {
    fn from_poly(conductor: u64, poly: Polynomial<Rational>) -> Self {
        let phi = cyclotomic_polynomial(conductor).expect("conductor already admitted");
        let residue = poly.rem(&phi).expect("Phi_N is nonzero");
        let deg = euler_phi(conductor) as usize;
        let mut coeffs = residue.coeffs().to_vec();
        coeffs.resize(deg, Scalar::zero());
        CyclotomicScalar { conductor, coeffs }
    }

    pub fn from_rational_value(q: Rational) -> Self {
        CyclotomicScalar {
            conductor: 1,
            coeffs: vec![q],
        }
    }

    /// `zeta_N^k`; fails if `N` exceeds the conductor bound.
    pub fn zeta(order: u64, k: i64) -> Result<Self, ScalarError> {
        assert!(order >= 1);
        if order > conductor_max() {
            return Err(ScalarError::ConductorOverflow {
                requested: order,
                bound: conductor_max(),
            });
        }
        let _ = cyclotomic_polynomial(order)?;
        let k = k.rem_euclid(order as i64) as usize;
        Ok(CyclotomicScalar::from_poly(
            order,
            Polynomial::monomial(k),
        ))
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn as_poly(&self) -> Polynomial<Rational> {
        Polynomial::new(self.coeffs.clone())
    }

    /// Embeds into `Q(zeta_m)` for a multiple `m` of the conductor via
    /// `zeta_N = zeta_m^(m/N)`.
    pub fn embed(&self, m: u64) -> Self {
        assert!(m % self.conductor == 0, "embedding needs a multiple conductor");
        if m == self.conductor {
            return self.clone();
        }
        let step = (m / self.conductor) as usize;
        let mut coeffs = vec![rat_int(0); self.coeffs.len() * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * step] = c.clone();
        }
        CyclotomicScalar::from_poly(m, Polynomial::new(coeffs))
    }

    fn lift_pair(&self, rhs: &Self) -> (Self, Self) {
        if self.conductor == rhs.conductor {
            return (self.clone(), rhs.clone());
        }
        let m = self.conductor.lcm(&rhs.conductor);
        (self.embed(m), rhs.embed(m))
    }

    /// Returns the value as a rational when it lies in the prime field.
    pub fn try_rational(&self) -> Option<Rational> {
        if self.coeffs.iter().skip(1).all(Scalar::is_zero) {
            Some(self.coeffs.first().cloned().unwrap_or_else(|| rat_int(0)))
        } else {
            None
        }
    }
}

impl PartialEq for CyclotomicScalar {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.lift_pair(other);
        a.coeffs == b.coeffs
    }
}

impl fmt::Debug for CyclotomicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyc(N={}; {})", self.conductor, self)
    }
}

impl fmt::Display for CyclotomicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.try_rational() {
            return write!(f, "{q}");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if Scalar::is_zero(c) {
                continue;
            }
            if first {
                first = false;
            } else {
                write!(f, "+")?;
            }
            if i == 0 {
                write!(f, "{c}")?;
            } else if Scalar::is_one(c) {
                write!(f, "z^{i}")?;
            } else {
                write!(f, "{c}*z^{i}")?;
            }
        }
        Ok(())
    }
}

impl Scalar for CyclotomicScalar {
    fn zero() -> Self {
        CyclotomicScalar::from_rational_value(rat_int(0))
    }

    fn one() -> Self {
        CyclotomicScalar::from_rational_value(rat_int(1))
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    fn add(&self, rhs: &Self) -> Self {
        let (mut a, b) = self.lift_pair(rhs);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x = &*x + y;
        }
        a
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn neg(&self) -> Self {
        CyclotomicScalar {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = self.lift_pair(rhs);
        CyclotomicScalar::from_poly(a.conductor, a.as_poly().mul(&b.as_poly()))
    }

    fn inv(&self) -> Result<Self, ScalarError> {
        if Scalar::is_zero(self) {
            return Err(ScalarError::DivisionByZero);
        }
        let phi = cyclotomic_polynomial(self.conductor)?;
        let (g, a, _) = self.as_poly().extended_gcd(&phi)?;
        assert_eq!(g, Polynomial::one(), "residue coprime to Phi_N");
        Ok(CyclotomicScalar::from_poly(self.conductor, a))
    }

    fn from_rational(q: &Rational) -> Result<Self, ScalarError> {
        Ok(CyclotomicScalar::from_rational_value(q.clone()))
    }
}

impl RootScalar for CyclotomicScalar {
    fn root_of_unity(order: u64, k: i64) -> Result<Self, ScalarError> {
        CyclotomicScalar::zeta(order, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Test-side long division, independent of `Polynomial::div_rem`.
    fn naive_rem(mut num: Vec<Rational>, den: &[Rational]) -> Vec<Rational> {
        let d = den.len() - 1;
        while num.len() > d {
            let k = num.len() - 1;
            let c = num[k].clone() / den[d].clone();
            for i in 0..=d {
                let t = &c * &den[i];
                num[k - d + i] = &num[k - d + i] - &t;
            }
            num.pop();
        }
        num
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        let as_ints = |p: &Polynomial<Rational>| -> Vec<i64> {
            p.coeffs()
                .iter()
                .map(|c| {
                    assert!(c.is_integer());
                    i64::try_from(c.to_integer()).unwrap()
                })
                .collect()
        };
        assert_eq!(as_ints(&cyclotomic_polynomial(1).unwrap()), vec![-1, 1]);
        assert_eq!(as_ints(&cyclotomic_polynomial(2).unwrap()), vec![1, 1]);
        assert_eq!(as_ints(&cyclotomic_polynomial(4).unwrap()), vec![1, 0, 1]);
        assert_eq!(as_ints(&cyclotomic_polynomial(6).unwrap()), vec![1, -1, 1]);
        assert_eq!(
            as_ints(&cyclotomic_polynomial(12).unwrap()),
            vec![1, 0, -1, 0, 1]
        );
    }

    #[test]
    fn phi_product_identity() {
        for n in 1..=60u64 {
            let mut prod = Polynomial::<Rational>::one();
            for d in divisors(n) {
                prod = prod.mul(&cyclotomic_polynomial(d).unwrap());
            }
            let mut xn1 = Polynomial::<Rational>::monomial(n as usize);
            xn1 = xn1.sub(&Polynomial::one());
            assert_eq!(prod, xn1, "product of Phi_d over d|{n}");
        }
    }

    #[test]
    fn zeta4_squares_to_minus_one() {
        // Oracle: reduce x^2 mod Phi_4 = x^2+1 with an independent reducer.
        let oracle = naive_rem(
            vec![rat_int(0), rat_int(0), rat_int(1)],
            &[rat_int(1), rat_int(0), rat_int(1)],
        );
        assert_eq!(oracle, vec![rat_int(-1), rat_int(0)]);
        let z = CyclotomicScalar::zeta(4, 1).unwrap();
        assert_eq!(z.mul(&z), CyclotomicScalar::from_int(-1));
    }

    #[test]
    fn zeta6_primitive_pair_sums_to_one() {
        // Oracle: x + x^5 mod Phi_6 = x^2 - x + 1.
        let oracle = naive_rem(
            vec![
                rat_int(0),
                rat_int(1),
                rat_int(0),
                rat_int(0),
                rat_int(0),
                rat_int(1),
            ],
            &[rat_int(1), rat_int(-1), rat_int(1)],
        );
        assert_eq!(oracle, vec![rat_int(1), rat_int(0)]);
        let a = CyclotomicScalar::zeta(6, 1).unwrap();
        let b = CyclotomicScalar::zeta(6, 5).unwrap();
        assert_eq!(a.add(&b), CyclotomicScalar::one());
    }

    #[test]
    fn zeta3_satisfies_its_minimal_polynomial() {
        let z = CyclotomicScalar::zeta(3, 1).unwrap();
        let sum = z.mul(&z).add(&z).add(&CyclotomicScalar::one());
        assert!(Scalar::is_zero(&sum));
    }

    #[test]
    fn roots_of_unity_orders() {
        assert_eq!(
            CyclotomicScalar::root_of_unity(1, 0).unwrap(),
            CyclotomicScalar::one()
        );
        assert_eq!(
            CyclotomicScalar::root_of_unity(2, 1).unwrap(),
            CyclotomicScalar::from_int(-1)
        );
        for (n, k) in [(3u64, 1i64), (4, 1), (6, 1), (12, 5)] {
            let z = CyclotomicScalar::root_of_unity(n, k).unwrap();
            assert!(Scalar::is_one(&z.pow(n)));
            for m in 1..n {
                assert!(!Scalar::is_one(&z.pow(m)), "zeta_{n}^{k} has order {n}");
            }
        }
    }

    #[test]
    fn mixed_conductor_arithmetic() {
        // zeta_4 * zeta_6 = zeta_12^(3+2) = zeta_12^5
        let a = CyclotomicScalar::zeta(4, 1).unwrap();
        let b = CyclotomicScalar::zeta(6, 1).unwrap();
        let c = CyclotomicScalar::zeta(12, 5).unwrap();
        assert_eq!(a.mul(&b), c);
        let inv = a.inv().unwrap();
        assert!(Scalar::is_one(&a.mul(&inv)));
    }

    #[test]
    fn conductor_bound_is_enforced() {
        let err = CyclotomicScalar::zeta(20_000, 1).unwrap_err();
        assert!(matches!(err, ScalarError::ConductorOverflow { .. }));
    }
}
