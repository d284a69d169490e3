//! Exact rational scalars.
//!
//! Backed by `num_rational::BigRational`, which keeps every value in lowest
//! terms with a positive denominator. The helpers here add the pieces the
//! rest of the crate needs: checked division, parsing of `p/q` literals and
//! floor/ceil onto small grids.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

use super::MathError;

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Arithmetic operation selector for [`rat_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn rat_arith(op: RatOp, a: &Rational, b: &Rational) -> Result<Rational, MathError> {
    Ok(match op {
        RatOp::Add => a + b,
        RatOp::Sub => a - b,
        RatOp::Mul => a * b,
        RatOp::Div => checked_div(a, b)?,
    })
}

pub fn rat_cmp(a: &Rational, b: &Rational) -> Ordering {
    a.cmp(b)
}

pub fn checked_div(a: &Rational, b: &Rational) -> Result<Rational, MathError> {
    if b.is_zero() {
        return Err(MathError::DivisionByZero);
    }
    Ok(a / b)
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Result<Rational, MathError> {
    let s = s.trim();
    let bad = || MathError::BadLiteral(s.to_string());
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(MathError::DivisionByZero);
            }
            Ok(Rational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(p))
        }
    }
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn to_text(r: &Rational) -> String {
    r.to_string()
}

/// Largest multiple of `1/den` that is `<= r`.
pub fn floor_to_grid(r: &Rational, den: i64) -> Rational {
    let d = BigInt::from(den);
    let scaled = r * Rational::from_integer(d.clone());
    Rational::new(scaled.floor().to_integer(), d)
}

/// Smallest multiple of `1/den` that is `>= r`.
pub fn ceil_to_grid(r: &Rational, den: i64) -> Rational {
    let d = BigInt::from(den);
    let scaled = r * Rational::from_integer(d.clone());
    Rational::new(scaled.ceil().to_integer(), d)
}

/// Least common multiple of the denominators of `values` (1 for an empty slice).
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

/// Serde adapter writing a rational as its `p/q` text.
pub mod as_text {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// [`as_text`] for sequences.
pub mod as_text_vec {
    use super::{parse_rational, Rational};
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&r.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_rational(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_is_canonical() {
        let r = rat_arith(RatOp::Add, &frac(1, 3), &frac(1, 6)).unwrap();
        assert_eq!(r, frac(1, 2));
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(
            rat_arith(RatOp::Div, &int(1), &int(0)),
            Err(MathError::DivisionByZero)
        );
    }

    #[test]
    fn compares_apery_quotients_exactly() {
        // x_3 = 1445/73 against (3/2) * x_2 with x_2 = 73/5
        let x3 = frac(1445, 73);
        let rhs = frac(3, 2) * frac(73, 5);
        assert_eq!(rat_cmp(&x3, &rhs), Ordering::Less);
        let big = parse_rational("123456789012345678901234567890/7").unwrap();
        assert_eq!(rat_cmp(&big, &(big.clone() + frac(1, 10_i64.pow(18)))), Ordering::Less);
    }

    #[test]
    fn parses_and_prints() {
        assert_eq!(parse_rational("-6/4").unwrap(), frac(-3, 2));
        assert_eq!(to_text(&frac(-3, 2)), "-3/2");
        assert_eq!(to_text(&int(7)), "7");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn grid_snapping() {
        assert_eq!(floor_to_grid(&frac(29, 10), 2), frac(5, 2));
        assert_eq!(ceil_to_grid(&frac(29, 10), 2), int(3));
        assert_eq!(floor_to_grid(&frac(-1, 3), 2), frac(-1, 2));
        assert_eq!(ceil_to_grid(&int(6), 2), int(6));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(60, 30), "118264581564861424".parse::<BigInt>().unwrap());
        assert_eq!(binomial(3, 4), BigInt::zero());
        assert_eq!(factorial(5), BigInt::from(120));
    }

    #[test]
    fn serde_adapters_use_text() {
        #[derive(serde::Serialize, serde::Deserialize, PartialEq, Debug)]
        struct W {
            #[serde(with = "as_text")]
            x: Rational,
            #[serde(with = "as_text_vec")]
            v: Vec<Rational>,
        }
        let w = W { x: frac(7, 2), v: vec![int(1), frac(-1, 3)] };
        let j = serde_json::to_string(&w).unwrap();
        assert_eq!(j, r#"{"x":"7/2","v":["1","-1/3"]}"#);
        assert_eq!(serde_json::from_str::<W>(&j).unwrap(), w);
    }
}
