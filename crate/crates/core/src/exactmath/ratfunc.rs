//! Rational functions of the index variable `n`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::poly::Polynomial;
use super::rational::Rational;
use super::MathError;

/// `numer / denom`, kept in lowest terms with a monic denominator. Zero is
/// `0 / 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RationalFunction {
    numer: Polynomial,
    denom: Polynomial,
}

/// Which weighted 2x2 determinant [`RationalFunction::weighted_det`] builds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetKind {
    /// `(n+1) F(n) - n F(n+1)`
    Delta,
    /// `(n+1) F(n) - (n-1) F(n+1)`
    DeltaBar,
}

impl RationalFunction {
    pub fn new(numer: Polynomial, denom: Polynomial) -> Result<Self, MathError> {
        if denom.is_zero() {
            return Err(MathError::ZeroDenominator);
        }
        if numer.is_zero() {
            return Ok(Self::zero());
        }
        let g = numer.gcd(&denom);
        let (numer, denom) = if g.is_constant() {
            (numer, denom)
        } else {
            (numer.exact_div(&g)?, denom.exact_div(&g)?)
        };
        let lc = denom.leading().unwrap().clone();
        let inv = Rational::one() / lc;
        Ok(RationalFunction {
            numer: numer.scale(&inv),
            denom: denom.scale(&inv),
        })
    }

    pub fn zero() -> Self {
        RationalFunction {
            numer: Polynomial::zero(),
            denom: Polynomial::one(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(Rational::from_integer(c.into()))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction {
            numer: p,
            denom: Polynomial::one(),
        }
    }

    /// Convenience constructor from ascending integer coefficient lists.
    pub fn from_ints(numer: &[i64], denom: &[i64]) -> Result<Self, MathError> {
        Self::new(Polynomial::from_ints(numer), Polynomial::from_ints(denom))
    }

    pub fn var() -> Self {
        Self::from_poly(Polynomial::var())
    }

    pub fn numer(&self) -> &Polynomial {
        &self.numer
    }

    pub fn denom(&self) -> &Polynomial {
        &self.denom
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.denom.is_constant()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.denom.is_constant() {
            self.numer.constant_value()
        } else {
            None
        }
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational, MathError> {
        let d = self.denom.eval(x);
        if d.is_zero() {
            return Err(MathError::Pole(x.to_string()));
        }
        Ok(self.numer.eval(x) / d)
    }

    pub fn eval_int(&self, n: i64) -> Result<Rational, MathError> {
        self.eval(&Rational::from_integer(n.into()))
    }

    /// `n -> F(n + k)`.
    pub fn shift(&self, k: i64) -> Self {
        // shifting preserves coprimality and monicity
        RationalFunction {
            numer: self.numer.shift(k),
            denom: self.denom.shift(k),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunction {
            numer: self.numer.scale(c),
            denom: self.denom.clone(),
        }
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Self {
        self * &Self::from_poly(p.clone())
    }

    pub fn recip(&self) -> Result<Self, MathError> {
        if self.is_zero() {
            return Err(MathError::DivisionByZero);
        }
        Self::new(self.denom.clone(), self.numer.clone())
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, MathError> {
        Ok(self * &rhs.recip()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::from_int(1), |acc, _| &acc * self)
    }

    /// `n -> F(n+1) - F(n)`.
    pub fn forward_diff(&self) -> Self {
        &self.shift(1) - self
    }

    pub fn weighted_det(&self, kind: DetKind) -> Self {
        let n = Polynomial::var();
        let n_plus_1 = Polynomial::from_ints(&[1, 1]);
        let lower_weight = match kind {
            DetKind::Delta => n,
            DetKind::DeltaBar => Polynomial::from_ints(&[-1, 1]),
        };
        &self.mul_poly(&n_plus_1) - &self.shift(1).mul_poly(&lower_weight)
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.denom == rhs.denom {
            return RationalFunction::new(&self.numer + &rhs.numer, self.denom.clone())
                .expect("nonzero denominator");
        }
        let g = self.denom.gcd(&rhs.denom);
        let a_cof = self.denom.exact_div(&g).expect("gcd divides");
        let b_cof = rhs.denom.exact_div(&g).expect("gcd divides");
        let numer = &(&self.numer * &b_cof) + &(&rhs.numer * &a_cof);
        let denom = &a_cof * &rhs.denom;
        RationalFunction::new(numer, denom).expect("nonzero denominator")
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        if self.is_zero() || rhs.is_zero() {
            return RationalFunction::zero();
        }
        RationalFunction::new(&self.numer * &rhs.numer, &self.denom * &rhs.denom)
            .expect("nonzero denominator")
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            numer: -&self.numer,
            denom: self.denom.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RationalFunction {
            type Output = RationalFunction;
            fn $m(self, rhs: RationalFunction) -> RationalFunction {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        -&self
    }
}

/// Recurrence-language syntax: `(numer)/(denom)`, or `(numer)` when the
/// denominator is 1.
impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom.is_constant() {
            write!(f, "({})", self.numer)
        } else {
            write!(f, "({})/({})", self.numer, self.denom)
        }
    }
}

#[derive(Deserialize)]
struct RawRationalFunction {
    numer: Polynomial,
    denom: Polynomial,
}

impl<'de> Deserialize<'de> for RationalFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawRationalFunction::deserialize(d)?;
        RationalFunction::new(raw.numer, raw.denom).map_err(serde::de::Error::custom)
    }
}

impl Default for RationalFunction {
    fn default() -> Self {
        Self::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rational::int;

    fn rf(n: &[i64], d: &[i64]) -> RationalFunction {
        RationalFunction::from_ints(n, d).unwrap()
    }

    #[test]
    fn normalizes_to_lowest_terms() {
        // (2n+2)/(4n^2+4n) = 1/(2n)
        let f = rf(&[2, 2], &[0, 4, 4]);
        assert_eq!(f.denom(), &Polynomial::from_ints(&[0, 1]));
        assert_eq!(f.numer().coeffs(), &[crate::exactmath::rational::frac(1, 2)]);
        assert!(RationalFunction::from_ints(&[1], &[0]).is_err());
    }

    #[test]
    fn forward_difference_of_fine_r() {
        // (7n-5)/(2n+2) -> 6/((n+1)(n+2))
        let r = rf(&[-5, 7], &[2, 2]);
        assert_eq!(r.forward_diff(), rf(&[6], &[2, 3, 1]));
        assert!(RationalFunction::from_int(5).forward_diff().is_zero());
    }

    #[test]
    fn forward_difference_cross_checked_pointwise() {
        let f = rf(&[1, 2], &[2, 1]);
        let d = f.forward_diff();
        assert_eq!(d, rf(&[3], &[6, 5, 1]));
        for n in 1..=10 {
            assert_eq!(
                d.eval_int(n).unwrap(),
                f.eval_int(n + 1).unwrap() - f.eval_int(n).unwrap()
            );
        }
    }

    #[test]
    fn motzkin_delta_and_schroeder_delta_bar() {
        let r = rf(&[1, 2], &[2, 1]);
        assert_eq!(r.weighted_det(DetKind::Delta), rf(&[3, 4, 2], &[6, 5, 1]));
        let s = rf(&[2, -1], &[1, 1]);
        assert_eq!(s.weighted_det(DetKind::DeltaBar), rf(&[5, -2], &[2, 1]));
        assert_eq!(
            RationalFunction::from_poly(Polynomial::from_ints(&[1, 1])).weighted_det(DetKind::Delta),
            RationalFunction::from_int(1)
        );
    }

    #[test]
    fn pole_is_reported() {
        let f = rf(&[1], &[-5, 1]);
        assert!(matches!(f.eval_int(5), Err(MathError::Pole(_))));
        assert_eq!(f.eval_int(6).unwrap(), int(1));
    }

    #[test]
    fn display_round_trips_through_text() {
        assert_eq!(rf(&[1, 2], &[2, 1]).to_string(), "(2*n + 1)/(n + 2)");
        assert_eq!(RationalFunction::from_int(2).to_string(), "(2)");
    }
}
