//! Built-in recurrences, each with an independent oracle.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{Line, QuotientBounds};
use crate::engine::Recurrence;
use crate::exactmath::rational::{binomial, ceil_to_grid, factorial, frac, int, parse_rational};
use crate::exactmath::{Polynomial, Rational, RationalFunction};
use crate::recdsl::parse_recurrence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{name}`; valid names: {}", valid_names().join(", "))]
    Unknown { name: String },
    #[error("bad legendre parameter `{0}`: expected a rational t >= 1")]
    BadParameter(String),
    #[error("no oracle for `{0}`")]
    NoOracle(String),
    #[error("oracle for `{name}` is undefined at n = {n}")]
    OutOfRange { name: String, n: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedProperty {
    LogBalanced,
    NotLogBalanced,
}

impl ExpectedProperty {
    pub fn as_str(self) -> &'static str {
        match self {
            ExpectedProperty::LogBalanced => "log_balanced",
            ExpectedProperty::NotLogBalanced => "not_log_balanced",
        }
    }
}

/// Direct computations, independent of the recurrences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Oracle {
    /// Motzkin paths by dynamic programming over heights.
    MotzkinPaths,
    /// `C_n = 2 F_n + F_{n-1}`.
    FineCatalan,
    /// `sum_k C(n,k)^r`.
    Franel(u32),
    /// `sum_k C(n,k)^2 C(n+k,k)^2`.
    AperySum,
    /// Lattice paths with steps E, N, NE that stay weakly below the diagonal.
    SchroederPaths,
    /// `P_n(t) = sum_k C(n,k) C(n+k,k) ((t-1)/2)^k`.
    LegendreSum(Rational),
    /// Lattice paths with steps E, N, NE.
    DelannoyPaths,
    /// `a_{n+1} = (n+1) a_n + a_1 + ... + a_n`.
    PolyominoSum,
    /// `sum_k C(n+1,k-1) C(n+1,k) C(n+1,k+1) / (C(n+1,1) C(n+1,2))`.
    BaxterSum,
    /// `(n+1)!`
    FactorialShiftUp,
    /// `(n-1)!`
    FactorialShiftDown,
    /// `(n!)^2`
    FactorialSquared,
    /// `0! + 1! + ... + n!`
    SumFactorials,
}

impl Oracle {
    /// First index at which the oracle is defined.
    pub fn first_index(&self) -> i64 {
        match self {
            Oracle::PolyominoSum => 1,
            Oracle::FactorialShiftDown => 1,
            _ => 0,
        }
    }

    pub fn eval(&self, n: i64) -> Option<Rational> {
        if n < self.first_index() {
            return None;
        }
        let u = n as u64;
        let v = match self {
            Oracle::MotzkinPaths => Rational::from_integer(motzkin(u as usize)),
            Oracle::FineCatalan => {
                let mut f = int(1);
                for k in 1..=u {
                    f = (Rational::from_integer(catalan(k)) - f) / int(2);
                }
                f
            }
            Oracle::Franel(r) => {
                Rational::from_integer((0..=u).map(|k| num_traits::pow(binomial(u, k), *r as usize)).sum())
            }
            Oracle::AperySum => Rational::from_integer(
                (0..=u)
                    .map(|k| {
                        let b = binomial(u, k) * binomial(u + k, k);
                        &b * &b
                    })
                    .sum(),
            ),
            Oracle::SchroederPaths => Rational::from_integer(lattice_paths(u as usize, true)),
            Oracle::LegendreSum(t) => {
                let h = (t - int(1)) / int(2);
                (0..=u)
                    .map(|k| {
                        Rational::from_integer(binomial(u, k) * binomial(u + k, k))
                            * num_traits::pow(h.clone(), k as usize)
                    })
                    .sum()
            }
            Oracle::DelannoyPaths => Rational::from_integer(lattice_paths(u as usize, false)),
            Oracle::PolyominoSum => {
                let mut a = vec![BigInt::from(1), BigInt::from(3)];
                while a.len() < u as usize {
                    let k = a.len();
                    let next = BigInt::from(k + 1) * &a[k - 1] + a.iter().sum::<BigInt>();
                    a.push(next);
                }
                Rational::from_integer(a[u as usize - 1].clone())
            }
            Oracle::BaxterSum => {
                if u == 0 {
                    int(1)
                } else {
                    let m = u + 1;
                    let num: BigInt = (1..=u)
                        .map(|k| binomial(m, k - 1) * binomial(m, k) * binomial(m, k + 1))
                        .sum();
                    Rational::new(num, binomial(m, 1) * binomial(m, 2))
                }
            }
            Oracle::FactorialShiftUp => Rational::from_integer(factorial(u + 1)),
            Oracle::FactorialShiftDown => Rational::from_integer(factorial(u - 1)),
            Oracle::FactorialSquared => {
                let f = factorial(u);
                Rational::from_integer(&f * &f)
            }
            Oracle::SumFactorials => Rational::from_integer((0..=u).map(factorial).sum()),
        };
        Some(v)
    }
}

fn catalan(n: u64) -> BigInt {
    binomial(2 * n, n) / BigInt::from(n + 1)
}

fn motzkin(n: usize) -> BigInt {
    // ways[h] = paths of the current length ending at height h
    let mut ways = vec![BigInt::zero(); n + 2];
    ways[0] = BigInt::one();
    for _ in 0..n {
        let mut next = vec![BigInt::zero(); n + 2];
        for h in 0..=n {
            if ways[h].is_zero() {
                continue;
            }
            next[h] += &ways[h];
            next[h + 1] += &ways[h];
            if h > 0 {
                next[h - 1] += &ways[h];
            }
        }
        ways = next;
    }
    ways.swap_remove(0)
}

/// Paths from `(0,0)` to `(n,n)` with unit steps E, N and diagonal steps,
/// optionally restricted to `y <= x`.
fn lattice_paths(n: usize, below_diagonal: bool) -> BigInt {
    let mut grid = vec![vec![BigInt::zero(); n + 1]; n + 1];
    grid[0][0] = BigInt::one();
    for x in 0..=n {
        for y in 0..=n {
            if (x, y) == (0, 0) || (below_diagonal && y > x) {
                continue;
            }
            let mut v = BigInt::zero();
            if x > 0 {
                v += &grid[x - 1][y];
            }
            if y > 0 {
                v += &grid[x][y - 1];
            }
            if x > 0 && y > 0 {
                v += &grid[x - 1][y - 1];
            }
            grid[x][y] = v;
        }
    }
    grid[n][n].clone()
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub recurrence: Recurrence,
    /// Quotient bounds `(m, M, n0)` as stated for the sequence, if any.
    pub expected_bounds: Option<QuotientBounds>,
    pub expected_property: ExpectedProperty,
    pub oracle: Option<Oracle>,
    pub notes: String,
}

impl CatalogEntry {
    pub fn oracle_eval(&self, n: i64) -> Result<Rational, CatalogError> {
        let o = self.oracle.as_ref().ok_or_else(|| CatalogError::NoOracle(self.name.clone()))?;
        o.eval(n).ok_or_else(|| CatalogError::OutOfRange {
            name: self.name.clone(),
            n,
        })
    }
}

const NAMES: [&str; 13] = [
    "apery",
    "baxter",
    "delannoy",
    "factorial_shift_down",
    "factorial_shift_up",
    "factorial_squared",
    "fine",
    "franel3",
    "franel4",
    "motzkin",
    "polyomino_dcc",
    "schroeder",
    "sum_factorials",
];

/// Legendre parameters included in [`all_names`].
pub const LEGENDRE_SAMPLES: [&str; 4] = ["1", "2", "3", "7/2"];

/// Names accepted by [`catalog_get`]; `legendre:<t>` stands for any
/// rational `t >= 1`.
pub fn valid_names() -> Vec<&'static str> {
    let mut v = NAMES.to_vec();
    v.push("legendre:<t>");
    v.sort_unstable();
    v
}

/// Every fixed entry plus the sampled Legendre entries, sorted.
pub fn all_names() -> Vec<String> {
    let mut v: Vec<String> = NAMES.iter().map(|s| s.to_string()).collect();
    v.extend(LEGENDRE_SAMPLES.iter().map(|t| format!("legendre:{t}")));
    v.sort();
    v
}

fn rec(name: &str, text: &str) -> Recurrence {
    parse_recurrence(text)
        .unwrap_or_else(|e| panic!("catalog entry {name} does not parse: {e}"))
        .with_name(name)
}

fn constant(m: Rational, big_m: Rational, n0: i64) -> Option<QuotientBounds> {
    Some(QuotientBounds::constant(m, big_m, n0).expect("catalog bounds are well formed"))
}

/// Smallest half-integer `>= t + sqrt(t^2 - 1)`, the positive fixed point
/// of `y = 2t - 1/y`.
fn legendre_upper(t: &Rational) -> Rational {
    let disc = t * t - int(1);
    let mut c = ceil_to_grid(t, 2);
    loop {
        let d = &c - t;
        if !d.is_negative() && &d * &d >= disc {
            return c;
        }
        c += frac(1, 2);
    }
}

fn legendre(name: &str, t: &Rational) -> Recurrence {
    let r = RationalFunction::new(Polynomial::from_ints(&[-1, 2]).scale(t), Polynomial::var())
        .expect("nonzero denominator");
    let s = RationalFunction::from_ints(&[1, -1], &[0, 1]).expect("nonzero denominator");
    Recurrence::new(vec![r, s], None, 0, vec![int(1), t.clone()])
        .expect("Bonnet recurrence is well formed")
        .with_name(name)
}

fn parse_t(param: &str) -> Result<Rational, CatalogError> {
    let t = parse_rational(param.trim()).map_err(|_| CatalogError::BadParameter(param.to_string()))?;
    if t < int(1) {
        return Err(CatalogError::BadParameter(param.to_string()));
    }
    Ok(t)
}

pub fn catalog_get(name: &str) -> Result<CatalogEntry, CatalogError> {
    use ExpectedProperty::*;
    if let Some(param) = name.strip_prefix("legendre:") {
        let t = parse_t(param)?;
        return Ok(CatalogEntry {
            name: name.to_string(),
            recurrence: legendre(name, &t),
            expected_bounds: constant(t.clone(), legendre_upper(&t), 1),
            expected_property: LogBalanced,
            oracle: Some(Oracle::LegendreSum(t)),
            notes: "Legendre polynomial values P_n(t) via the Bonnet recurrence".into(),
        });
    }
    let (recurrence, expected_bounds, expected_property, oracle, notes) = match name {
        "motzkin" => (
            rec(name, "a[n] = ((2*n+1)/(n+2))*a[n-1] + (3*(n-1)/(n+2))*a[n-2]; a[0]=1; a[1]=1"),
            constant(int(2), frac(7, 2), 2),
            LogBalanced,
            Some(Oracle::MotzkinPaths),
            "Motzkin numbers",
        ),
        "fine" => (
            rec(name, "a[n] = ((7*n-5)/(2*n+2))*a[n-1] + ((2*n-1)/(n+1))*a[n-2]; a[0]=1; a[1]=0"),
            // x_3 = 2, so the bounds 3 <= x_n <= 6 start at n = 4
            constant(int(3), int(6), 4),
            LogBalanced,
            Some(Oracle::FineCatalan),
            "Fine numbers; log-balanced for the shifted sequence starting at B_2",
        ),
        "franel3" => (
            rec(name, "a[n] = ((7*n^2-7*n+2)/n^2)*a[n-1] + (8*(n-1)^2/n^2)*a[n-2]; a[0]=1; a[1]=2"),
            constant(int(5), int(9), 3),
            LogBalanced,
            Some(Oracle::Franel(3)),
            "Franel numbers of order 3",
        ),
        "franel4" => (
            rec(
                name,
                "a[n] = (2*(6*n^3-9*n^2+5*n-1)/n^3)*a[n-1] \
                 + ((4*n-3)*(4*n-4)*(4*n-5)/n^3)*a[n-2]; a[0]=1; a[1]=2",
            ),
            None,
            LogBalanced,
            Some(Oracle::Franel(4)),
            "Franel numbers of order 4; no bounds are stated, the pipeline proposes its own",
        ),
        "apery" => (
            rec(name, "a[n] = ((34*n^3-51*n^2+27*n-5)/n^3)*a[n-1] - ((n-1)^3/n^3)*a[n-2]; a[0]=1; a[1]=5"),
            // only m = 1 is stated; the limit (1+sqrt 2)^4 < 34 supplies M
            constant(int(1), int(34), 1),
            LogBalanced,
            Some(Oracle::AperySum),
            "Apery numbers for zeta(3)",
        ),
        "schroeder" => (
            rec(name, "a[n] = (3*(2*n-1)/(n+1))*a[n-1] - ((n-2)/(n+1))*a[n-2]; a[0]=1; a[1]=2"),
            constant(int(3), int(6), 2),
            LogBalanced,
            Some(Oracle::SchroederPaths),
            "large Schroeder numbers",
        ),
        "delannoy" => {
            let t = int(3);
            return Ok(CatalogEntry {
                name: name.to_string(),
                recurrence: legendre(name, &t),
                expected_bounds: constant(t.clone(), legendre_upper(&t), 1),
                expected_property: LogBalanced,
                oracle: Some(Oracle::DelannoyPaths),
                notes: "central Delannoy numbers, D_n = P_n(3)".into(),
            });
        }
        "polyomino_dcc" => (
            rec(name, "a[n] = (n+2)*a[n-1] - (n-1)*a[n-2]; a[1]=1; a[2]=3"),
            Some(
                QuotientBounds::affine(
                    Line {
                        slope: int(1),
                        intercept: int(1),
                    },
                    Line {
                        slope: int(1),
                        intercept: int(2),
                    },
                    2,
                )
                .expect("catalog bounds are well formed"),
            ),
            LogBalanced,
            Some(Oracle::PolyominoSum),
            "directed column-convex polyominoes by height",
        ),
        "baxter" => (
            rec(
                name,
                "a[n] = (2*(9*n^3+3*n^2-4*n+4)/((n+2)*(n+3)*(3*n-2)))*a[n-1] \
                 + ((3*n-1)*(n-2)*(15*n^2-5*n-14)/((n+1)*(n+2)*(n+3)*(3*n-2)))*a[n-2] \
                 + (8*(3*n+1)*(n-2)^2*(n-3)/((n+1)*(n+2)*(n+3)*(3*n-2)))*a[n-3]; \
                 a[0]=1; a[1]=1; a[2]=2",
            ),
            constant(int(7), int(9), 47),
            LogBalanced,
            Some(Oracle::BaxterSum),
            "Baxter permutations; initial values 1, 1, 2 taken from the triple-binomial formula",
        ),
        "factorial_shift_up" => (
            rec(name, "a[n] = (n+1)*a[n-1]; a[0]=1"),
            None,
            LogBalanced,
            Some(Oracle::FactorialShiftUp),
            "(n+1)!",
        ),
        "factorial_shift_down" => (
            rec(name, "a[n] = (n-1)*a[n-1]; a[2]=1"),
            None,
            NotLogBalanced,
            Some(Oracle::FactorialShiftDown),
            "(n-1)!, starting at n = 2",
        ),
        "factorial_squared" => (
            rec(name, "a[n] = n^2*a[n-1]; a[0]=1"),
            None,
            NotLogBalanced,
            Some(Oracle::FactorialSquared),
            "(n!)^2",
        ),
        "sum_factorials" => (
            rec(name, "a[n] = (n+1)*a[n-1] - n*a[n-2]; a[0]=1; a[1]=2"),
            None,
            NotLogBalanced,
            Some(Oracle::SumFactorials),
            "0! + ... + n!; a_n = a_{n-1} + n! with the factorial eliminated",
        ),
        _ => {
            return Err(CatalogError::Unknown {
                name: name.to_string(),
            })
        }
    };
    Ok(CatalogEntry {
        name: name.to_string(),
        recurrence,
        expected_bounds,
        expected_property,
        oracle,
        notes: notes.to_string(),
    })
}

pub fn oracle_eval(name: &str, n: i64) -> Result<Rational, CatalogError> {
    catalog_get(name)?.oracle_eval(n)
}
