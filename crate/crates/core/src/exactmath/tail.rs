//! Sign decisions on integer tails `n >= n0`.
//!
//! Every real root of a polynomial lies below its Cauchy bound
//! `1 + max |a_i / a_d|`, so beyond that bound the sign is the sign of the
//! leading coefficient and only finitely many integers need an exact look.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use super::ratfunc::RationalFunction;
use super::rational::Rational;
use super::MathError;

/// Outcome of [`poly_tail_nonneg`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "result", content = "n")]
pub enum TailCheck {
    Holds,
    FailsAt(i64),
}

impl TailCheck {
    pub fn holds(self) -> bool {
        matches!(self, TailCheck::Holds)
    }
}

/// Strongest sign class valid on a whole integer tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    Positive,
    Nonnegative,
    Zero,
    Nonpositive,
    Negative,
    Varies,
}

impl SignClass {
    pub fn is_nonneg(self) -> bool {
        matches!(self, SignClass::Positive | SignClass::Nonnegative | SignClass::Zero)
    }

    pub fn is_nonpos(self) -> bool {
        matches!(self, SignClass::Negative | SignClass::Nonpositive | SignClass::Zero)
    }
}

/// Integer-coefficient copy of a polynomial, for fast exact evaluation.
#[derive(Clone, Debug)]
pub(crate) struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub(crate) fn new(p: &Polynomial) -> Self {
        IntPoly {
            coeffs: p.integer_coeffs(),
        }
    }

    pub(crate) fn eval(&self, n: i64) -> BigInt {
        let x = BigInt::from(n);
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * &x + c)
    }

    fn leading_sign(&self) -> i32 {
        match self.coeffs.last() {
            None => 0,
            Some(c) if c.is_positive() => 1,
            Some(_) => -1,
        }
    }

    /// `ceil(1 + max |a_i / a_d|)` as an integer.
    fn cauchy_bound(&self) -> i64 {
        let Some(lead) = self.coeffs.last() else {
            return 0;
        };
        let lead = lead.abs();
        let mut best = Rational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let r = Rational::new(c.abs(), lead.clone());
            if r > best {
                best = r;
            }
        }
        let b = (best + Rational::one()).ceil().to_integer();
        b.to_i64().unwrap_or(i64::MAX)
    }

    /// True when all coefficients of `P(n + k)` are nonnegative, which
    /// proves `P(n) >= 0` for every `n >= k`.
    fn shifted_coeffs_nonneg(p: &Polynomial, k: i64) -> bool {
        p.shift(k).coeffs().iter().all(|c| !c.is_negative())
    }
}

/// Exact scan limit: every integer above this has the leading sign.
fn scan_limit(ip: &IntPoly, n0: i64) -> i64 {
    ip.cauchy_bound().max(n0)
}

/// Decides `P(n) >= 0` for every integer `n >= n0`; on failure reports the
/// smallest negative point.
pub fn poly_tail_nonneg(p: &Polynomial, n0: i64) -> TailCheck {
    if p.is_zero() {
        return TailCheck::Holds;
    }
    let ip = IntPoly::new(p);
    if ip.leading_sign() > 0 && IntPoly::shifted_coeffs_nonneg(p, n0) {
        return TailCheck::Holds;
    }
    let limit = scan_limit(&ip, n0);
    // for a negative leading coefficient the point limit + 1 is negative
    let end = if ip.leading_sign() < 0 { limit + 1 } else { limit };
    for n in n0..=end {
        if ip.eval(n).is_negative() {
            return TailCheck::FailsAt(n);
        }
    }
    TailCheck::Holds
}

/// Smallest `k >= n0` with `P(n) >= 0` for all `n >= k`, or `None` when the
/// leading coefficient is negative (the polynomial is eventually negative).
pub fn tail_start(p: &Polynomial, n0: i64) -> Option<i64> {
    if p.is_zero() {
        return Some(n0);
    }
    let ip = IntPoly::new(p);
    if ip.leading_sign() < 0 {
        return None;
    }
    if IntPoly::shifted_coeffs_nonneg(p, n0) {
        return Some(n0);
    }
    let limit = scan_limit(&ip, n0);
    let mut start = n0;
    for n in n0..=limit {
        if ip.eval(n).is_negative() {
            start = n + 1;
        }
    }
    Some(start)
}

/// Smallest integer root `>= n0`, if any.
pub fn first_integer_root(p: &Polynomial, n0: i64) -> Option<i64> {
    if p.is_zero() {
        return Some(n0);
    }
    let ip = IntPoly::new(p);
    let limit = scan_limit(&ip, n0);
    (n0..=limit).find(|&n| ip.eval(n).is_zero())
}

/// Largest integer root `>= n0`, if any.
pub fn last_integer_root(p: &Polynomial, n0: i64) -> Option<i64> {
    if p.is_zero() {
        return None;
    }
    let ip = IntPoly::new(p);
    let limit = scan_limit(&ip, n0);
    (n0..=limit).rev().find(|&n| ip.eval(n).is_zero())
}

/// Strongest sign class of `F(n)` over all integers `n >= n0`.
pub fn ratfunc_tail_sign(f: &RationalFunction, n0: i64) -> Result<SignClass, MathError> {
    if let Some(pole) = first_integer_root(f.denom(), n0) {
        return Err(MathError::Pole(pole.to_string()));
    }
    if f.is_zero() {
        return Ok(SignClass::Zero);
    }
    // sign F(n) = sign N(n)D(n) away from poles
    let prod = f.numer() * f.denom();
    let nonneg = poly_tail_nonneg(&prod, n0).holds();
    let nonpos = poly_tail_nonneg(&-&prod, n0).holds();
    let has_root = first_integer_root(f.numer(), n0).is_some();
    Ok(match (nonneg, nonpos) {
        (true, true) => SignClass::Zero,
        (true, false) if has_root => SignClass::Nonnegative,
        (true, false) => SignClass::Positive,
        (false, true) if has_root => SignClass::Nonpositive,
        (false, true) => SignClass::Negative,
        (false, false) => SignClass::Varies,
    })
}

/// Polynomial `P` with `F(n) >= 0 <=> P(n) >= 0` on the tail `n >= n0`.
///
/// When the denominator keeps a strict constant sign on the tail the result
/// is `±numer` (cleared to integer coefficients); otherwise it is
/// `numer * denom`. Errors on a pole in the tail.
pub fn clear_for_tail(f: &RationalFunction, n0: i64) -> Result<Polynomial, MathError> {
    if let Some(pole) = first_integer_root(f.denom(), n0) {
        return Err(MathError::Pole(pole.to_string()));
    }
    let d = f.denom();
    let p = if poly_tail_nonneg(d, n0).holds() {
        f.numer().clone()
    } else if poly_tail_nonneg(&-d, n0).holds() {
        -f.numer()
    } else {
        f.numer() * d
    };
    Ok(p.clear_denominators())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(n: &[i64], d: &[i64]) -> RationalFunction {
        RationalFunction::from_ints(n, d).unwrap()
    }

    #[test]
    fn known_tail_claims() {
        assert_eq!(poly_tail_nonneg(&Polynomial::from_ints(&[80, -30, 10]), 1), TailCheck::Holds);
        assert_eq!(poly_tail_nonneg(&Polynomial::from_ints(&[-3, -1, 1]), 3), TailCheck::Holds);
        assert_eq!(poly_tail_nonneg(&Polynomial::zero(), 0), TailCheck::Holds);
        assert_eq!(
            poly_tail_nonneg(&Polynomial::from_ints(&[-3, -1, 1]), 1),
            TailCheck::FailsAt(1)
        );
    }

    #[test]
    fn negative_leading_coefficient_finds_witness() {
        // -n + 10 is negative from 11 on
        assert_eq!(poly_tail_nonneg(&Polynomial::from_ints(&[10, -1]), 0), TailCheck::FailsAt(11));
        assert_eq!(poly_tail_nonneg(&Polynomial::from_ints(&[-1]), 5), TailCheck::FailsAt(5));
        assert_eq!(tail_start(&Polynomial::from_ints(&[10, -1]), 0), None);
    }

    #[test]
    fn tail_start_skips_late_negatives() {
        // (n-3)(n-7) is negative on 4..6
        let p = Polynomial::from_ints(&[21, -10, 1]);
        assert_eq!(tail_start(&p, 0), Some(7));
        assert_eq!(tail_start(&p, 9), Some(9));
    }

    #[test]
    fn sign_classes() {
        // -(n-1)^3 / n^3
        let apery_s = rf(&[1, -3, 3, -1], &[0, 0, 0, 1]);
        assert_eq!(ratfunc_tail_sign(&apery_s, 2).unwrap(), SignClass::Negative);
        assert_eq!(ratfunc_tail_sign(&apery_s, 1).unwrap(), SignClass::Nonpositive);
        assert_eq!(ratfunc_tail_sign(&rf(&[9], &[2, 3, 1]), 1).unwrap(), SignClass::Positive);
        assert_eq!(ratfunc_tail_sign(&rf(&[-5, 1], &[1, 1]), 1).unwrap(), SignClass::Varies);
        assert_eq!(ratfunc_tail_sign(&RationalFunction::zero(), 0).unwrap(), SignClass::Zero);
        assert!(matches!(ratfunc_tail_sign(&rf(&[1], &[-4, 1]), 1), Err(MathError::Pole(p)) if p == "4"));
    }

    #[test]
    fn denominator_sign_change_between_integers() {
        // 1/(3n-2): denominator root at 2/3 is not an integer; positive for n >= 1
        let f = rf(&[1], &[-2, 3]);
        assert_eq!(ratfunc_tail_sign(&f, 1).unwrap(), SignClass::Positive);
        assert_eq!(ratfunc_tail_sign(&f, 0).unwrap(), SignClass::Varies);
    }

    #[test]
    fn clearing_keeps_numerator_for_positive_denominators() {
        let f = rf(&[80, -30, 10], &[0, 1, 2, 1]);
        assert_eq!(clear_for_tail(&f, 1).unwrap(), Polynomial::from_ints(&[80, -30, 10]));
    }
}
