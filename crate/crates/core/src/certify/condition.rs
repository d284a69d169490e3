//! Sufficient conditions written as sums `c(n) * prod_j x_{n-j}^{e_j}` and
//! their discharge on integer tails.
//!
//! Every quotient is positive once bounds hold, so each monomial can be
//! bounded on its own: with `c(n) >= 0` the monomial is at least the value
//! obtained by putting `m` for positive exponents and `M` for negative ones,
//! and the choices swap for `c(n) <= 0`.

use serde::{Deserialize, Serialize};

use super::bounds::QuotientBounds;
use super::{CertifyFailure, TailInequality};
use crate::exactmath::tail::{clear_for_tail, last_integer_root, tail_start};
use crate::exactmath::{poly_tail_nonneg, RationalFunction, TailCheck};

/// Largest lag a monomial may reference.
pub(crate) const LAGS: usize = 5;

/// Sign a coefficient function keeps from some index on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSign {
    Zero,
    Nonnegative,
    Nonpositive,
}

impl TailSign {
    fn text(self) -> &'static str {
        match self {
            TailSign::Zero => "= 0",
            TailSign::Nonnegative => ">= 0",
            TailSign::Nonpositive => "<= 0",
        }
    }
}

/// A coefficient function together with the index from which its sign is
/// constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignDecision {
    pub label: String,
    pub sign: TailSign,
    pub from: i64,
}

#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub label: String,
    pub coeff: RationalFunction,
    pub exps: [i32; LAGS],
}

impl Term {
    pub fn new(label: impl Into<String>, coeff: RationalFunction, vars: &[(usize, i32)]) -> Self {
        let mut exps = [0; LAGS];
        for &(lag, e) in vars {
            exps[lag] += e;
        }
        Term {
            label: label.into(),
            coeff,
            exps,
        }
    }

    pub fn pure(label: impl Into<String>, coeff: RationalFunction) -> Self {
        Self::new(label, coeff, &[])
    }

    fn max_lag(&self) -> Option<usize> {
        (0..LAGS).rev().find(|&j| self.exps[j] != 0)
    }

    fn scaled(&self, label: String, c: &RationalFunction) -> Term {
        Term {
            label,
            coeff: &self.coeff * c,
            exps: self.exps,
        }
    }
}

/// Multiplies out `sum_i t_i` by a coefficient and an extra monomial.
pub(crate) fn distribute(
    factor_label: &str,
    factor: &RationalFunction,
    extra: &[(usize, i32)],
    terms: &[Term],
) -> Vec<Term> {
    terms
        .iter()
        .map(|t| {
            let mut out = t.scaled(format!("{factor_label}·{}", t.label), factor);
            for &(lag, e) in extra {
                out.exps[lag] += e;
            }
            out
        })
        .collect()
}

/// A coefficient function that must keep a given sign for the argument
/// behind a condition to apply.
#[derive(Clone, Debug)]
pub(crate) struct SideCondition {
    pub label: String,
    pub f: RationalFunction,
    pub want: TailSign,
}

#[derive(Clone, Debug)]
pub(crate) struct Condition {
    pub description: String,
    pub terms: Vec<Term>,
    pub side: Vec<SideCondition>,
    /// Smallest `n` at which the argument is structurally valid.
    pub lo: i64,
}

/// Result of discharging a condition for every `n >= n_star`.
#[derive(Clone, Debug)]
pub(crate) struct Discharged {
    pub n_star: i64,
    pub inequalities: Vec<TailInequality>,
    pub signs: Vec<SignDecision>,
}

/// Smallest `k >= lo` with `f(n)` defined and nonnegative for all `n >= k`.
pub(crate) fn nonneg_from(f: &RationalFunction, lo: i64) -> Option<i64> {
    let lo = match last_integer_root(f.denom(), lo) {
        Some(r) => r + 1,
        None => lo,
    };
    tail_start(&(f.numer() * f.denom()), lo)
}

/// Eventual sign of `f` and the index from which it holds.
pub(crate) fn eventual_sign(f: &RationalFunction, lo: i64) -> (TailSign, i64) {
    if f.is_zero() {
        return (TailSign::Zero, lo);
    }
    match nonneg_from(f, lo) {
        Some(k) => (TailSign::Nonnegative, k),
        None => (
            TailSign::Nonpositive,
            nonneg_from(&-f, lo).expect("a nonzero rational function has an eventual sign"),
        ),
    }
}

fn record(description: String, f: &RationalFunction, from: i64) -> TailInequality {
    let polynomial = clear_for_tail(f, from).expect("no poles beyond the decided start");
    debug_assert!(poly_tail_nonneg(&polynomial, from).holds());
    TailInequality {
        description,
        polynomial,
        n0: from,
    }
}

fn tail_failure(description: String, f: &RationalFunction, from: i64) -> CertifyFailure {
    let from = match last_integer_root(f.denom(), from) {
        Some(r) => r + 1,
        None => from,
    };
    let polynomial = clear_for_tail(f, from).expect("poles skipped");
    let witness = match poly_tail_nonneg(&polynomial, from) {
        TailCheck::FailsAt(w) => w,
        TailCheck::Holds => from,
    };
    CertifyFailure::Tail {
        value: f.eval_int(witness).expect("no pole at witness"),
        description,
        polynomial,
        from,
        witness,
    }
}

/// Discharges `cond` for all large `n`, returning the smallest start found.
///
/// Two routes are tried. With bounds, every monomial is replaced by its
/// adverse bound. Without them, monomials with nonnegative coefficients are
/// dropped (they are nonnegative), which needs only the positivity of the
/// quotients. The route with the smaller start wins.
pub(crate) fn discharge(
    cond: &Condition,
    bounds: Option<&QuotientBounds>,
) -> Result<Discharged, CertifyFailure> {
    let mut inequalities = Vec::new();
    let mut signs = Vec::new();
    let mut lo = cond.lo;

    for s in &cond.side {
        let (sign, from) = eventual_sign(&s.f, cond.lo);
        signs.push(SignDecision {
            label: s.label.clone(),
            sign,
            from,
        });
        let ok = sign == TailSign::Zero || sign == s.want;
        if !ok {
            return Err(CertifyFailure::Unsupported {
                reason: format!(
                    "{} is eventually {}, the argument needs {}",
                    s.label,
                    sign.text(),
                    s.want.text()
                ),
            });
        }
        if sign != TailSign::Zero {
            let f = if s.want == TailSign::Nonpositive { -&s.f } else { s.f.clone() };
            inequalities.push(record(format!("{} {}", s.label, s.want.text()), &f, from));
        }
        lo = lo.max(from);
    }

    let mut decided = Vec::new();
    let mut max_lag = None::<usize>;
    for t in &cond.terms {
        let (sign, from) = eventual_sign(&t.coeff, cond.lo);
        signs.push(SignDecision {
            label: t.label.clone(),
            sign,
            from,
        });
        if let Some(l) = t.max_lag() {
            max_lag = max_lag.max(Some(l));
        }
        decided.push((t, sign, from));
    }

    // quotients entering the condition must be positive, which the bounds
    // guarantee from their start on
    if let (Some(l), Some(b)) = (max_lag, bounds) {
        lo = lo.max(b.n0 + l as i64);
    }
    if max_lag.is_some() && bounds.is_none() {
        return Err(CertifyFailure::Unsupported {
            reason: "condition involves quotients but no bounds were supplied".into(),
        });
    }

    let var_terms = || decided.iter().filter(|(t, s, _)| t.max_lag().is_some() && *s != TailSign::Zero);
    let var_start = var_terms().map(|&(_, _, f)| f).max().unwrap_or(lo).max(lo);
    let pure: RationalFunction = decided
        .iter()
        .filter(|(t, _, _)| t.max_lag().is_none())
        .fold(RationalFunction::zero(), |acc, (t, _, _)| &acc + &t.coeff);

    // route A: adverse substitution
    let mut route_a = None;
    if let Some(b) = bounds {
        let mut sub = pure.clone();
        for &(t, sign, _) in var_terms() {
            let mut v = t.coeff.clone();
            for (j, &e) in t.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let want_small = (sign == TailSign::Nonnegative) == (e > 0);
                let bound = if want_small { b.lower_at(j) } else { b.upper_at(j) };
                let power = if e > 0 {
                    bound.pow(e as u32)
                } else {
                    bound.recip().expect("bounds are positive").pow((-e) as u32)
                };
                v = &v * &power;
            }
            sub = &sub + &v;
        }
        route_a = Some((nonneg_from(&sub, var_start), sub));
    }

    // route B: drop nonnegative monomials
    let route_b = var_terms()
        .all(|&(_, s, _)| s == TailSign::Nonnegative)
        .then(|| nonneg_from(&pure, var_start))
        .flatten();

    let a_start = route_a.as_ref().and_then(|(k, _)| *k);
    let (n_star, main, label) = match (a_start, route_b) {
        (Some(a), Some(bk)) if bk < a => (bk, pure.clone(), "quotient monomials dropped"),
        (Some(a), _) => (a, route_a.as_ref().unwrap().1.clone(), "bounds substituted"),
        (None, Some(bk)) => (bk, pure.clone(), "quotient monomials dropped"),
        (None, None) => {
            let (f, label) = match route_a {
                Some((_, s)) => (s, " [bounds substituted]"),
                None => (pure, ""),
            };
            return Err(tail_failure(format!("{}{label}", cond.description), &f, var_start));
        }
    };

    for &(t, sign, from) in var_terms() {
        let f = if sign == TailSign::Nonpositive { -&t.coeff } else { t.coeff.clone() };
        inequalities.push(record(format!("{} {}", t.label, sign.text()), &f, from));
    }
    inequalities.push(record(format!("{} [{label}]", cond.description), &main, n_star));

    Ok(Discharged {
        n_star,
        inequalities,
        signs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rational::int;
    use crate::exactmath::Polynomial;

    fn rf(n: &[i64], d: &[i64]) -> RationalFunction {
        RationalFunction::from_ints(n, d).unwrap()
    }

    #[test]
    fn eventual_signs() {
        assert_eq!(eventual_sign(&rf(&[-3, -1, 1], &[1]), 0), (TailSign::Nonnegative, 3));
        assert_eq!(eventual_sign(&rf(&[5, -1], &[1]), 0), (TailSign::Nonpositive, 5));
        assert_eq!(eventual_sign(&RationalFunction::zero(), 4), (TailSign::Zero, 4));
        // pole at 6 pushes the start past it
        assert_eq!(eventual_sign(&rf(&[1], &[-6, 1]), 0), (TailSign::Nonnegative, 7));
    }

    #[test]
    fn fine_condition_reduces_to_quadratic() {
        // m^2 [m dR(n) + dS(n)] - S(n) [M dR(n-1) + dS(n-1)] with m = 3, M = 6
        let r = rf(&[-5, 7], &[2, 2]);
        let s = rf(&[-1, 2], &[1, 1]);
        let (dr, ds) = (r.forward_diff(), s.forward_diff());
        let cond = Condition {
            description: "fine".into(),
            terms: vec![
                Term::new("dR", dr.clone(), &[(0, 1), (1, 1), (2, 1)]),
                Term::new("dS", ds.clone(), &[(1, 1), (2, 1)]),
                Term::new("-S dR(n-1)", -&(&s * &dr.shift(-1)), &[(2, 1)]),
                Term::pure("-S dS(n-1)", -&(&s * &ds.shift(-1))),
            ],
            side: vec![],
            lo: 3,
        };
        let b = QuotientBounds::constant(int(3), int(6), 1).unwrap();
        let d = discharge(&cond, Some(&b)).unwrap();
        let main = d.inequalities.last().unwrap();
        assert!(poly_tail_nonneg(&main.polynomial, main.n0).holds());
        assert_eq!(main.polynomial.degree(), Some(2));
        // sign agreement with 10n^2 - 30n + 80 on a range
        let reference = Polynomial::from_ints(&[80, -30, 10]);
        for n in 1..=100 {
            let got = main.polynomial.eval_int(n);
            assert_eq!(got > int(0), reference.eval_int(n) > int(0));
        }
    }

    #[test]
    fn apery_prop2_tail() {
        let r = rf(&[-5, 27, -51, 34], &[0, 0, 0, 1]);
        let s = rf(&[1, -3, 3, -1], &[0, 0, 0, 1]);
        let cond = Condition {
            description: "apery".into(),
            terms: vec![
                Term::new("dR", r.forward_diff(), &[(1, 1)]),
                Term::pure("dS", s.forward_diff()),
            ],
            side: vec![],
            lo: 2,
        };
        let b = QuotientBounds::constant(int(1), int(34), 1).unwrap();
        let d = discharge(&cond, Some(&b)).unwrap();
        let main = d.inequalities.last().unwrap();
        // independently: 4(12n^4 + 12n^3 - 3n^2 - 3n + 1) over n^3 (n+1)^3
        assert_eq!(main.polynomial, Polynomial::from_ints(&[4, -12, -12, 48, 48]));
        // same sign as the published numerator on n >= 0
        let printed = Polynomial::from_ints(&[4, -12, -10, 52, 50]);
        for n in 0..=200 {
            assert_eq!(main.polynomial.eval_int(n) > int(0), printed.eval_int(n) > int(0));
        }
    }

    #[test]
    fn failure_carries_witness() {
        let cond = Condition {
            description: "delta".into(),
            terms: vec![Term::pure("D", rf(&[-1], &[1]))],
            side: vec![],
            lo: 2,
        };
        match discharge(&cond, None) {
            Err(CertifyFailure::Tail { witness, value, .. }) => {
                assert_eq!(witness, 2);
                assert_eq!(value, int(-1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn side_condition_sign_mismatch_is_unsupported() {
        let cond = Condition {
            description: "x".into(),
            terms: vec![Term::pure("one", RationalFunction::from_int(1))],
            side: vec![SideCondition {
                label: "S(n)".into(),
                f: rf(&[0, -1], &[1]),
                want: TailSign::Nonnegative,
            }],
            lo: 1,
        };
        assert!(matches!(discharge(&cond, None), Err(CertifyFailure::Unsupported { .. })));
    }
}
