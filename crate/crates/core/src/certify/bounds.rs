//! Quotient envelopes `m(n) <= x_n <= M(n)`: proposal and inductive
//! verification.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use super::condition::{discharge, Condition, Term};
use super::{BaseCase, BaseRelation, CertifyFailure, Context, TailInequality};
use crate::engine::Recurrence;
use crate::exactmath::rational::{as_text, ceil_to_grid, floor_to_grid, to_text};
use crate::exactmath::{poly_tail_nonneg, Polynomial, Rational, RationalFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundShape {
    Constant,
    Affine,
}

/// `slope * n + intercept`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Line {
    #[serde(with = "as_text")]
    pub slope: Rational,
    #[serde(with = "as_text")]
    pub intercept: Rational,
}

impl Line {
    pub fn constant(c: Rational) -> Self {
        Line {
            slope: Rational::zero(),
            intercept: c,
        }
    }

    pub fn poly(&self) -> Polynomial {
        Polynomial::linear(self.slope.clone(), self.intercept.clone())
    }

    pub fn at(&self, n: i64) -> Rational {
        &self.slope * Rational::from_integer(n.into()) + &self.intercept
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "BoundsRepr", try_from = "BoundsRepr")]
pub struct QuotientBounds {
    pub shape: BoundShape,
    pub lower: Line,
    pub upper: Line,
    pub n0: i64,
}

/// Wire form: constant envelopes also carry `m` and `M` directly.
#[derive(Serialize, Deserialize)]
struct BoundsRepr {
    shape: BoundShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<String>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    big_m: Option<String>,
    lower: Line,
    upper: Line,
    n0: i64,
}

impl From<QuotientBounds> for BoundsRepr {
    fn from(b: QuotientBounds) -> Self {
        let constant = b.shape == BoundShape::Constant;
        BoundsRepr {
            shape: b.shape,
            m: constant.then(|| to_text(&b.lower.intercept)),
            big_m: constant.then(|| to_text(&b.upper.intercept)),
            lower: b.lower,
            upper: b.upper,
            n0: b.n0,
        }
    }
}

impl TryFrom<BoundsRepr> for QuotientBounds {
    type Error = CertifyFailure;

    fn try_from(r: BoundsRepr) -> Result<Self, Self::Error> {
        let agrees = |v: &Option<String>, l: &Line| v.as_ref().is_none_or(|t| *t == to_text(&l.intercept));
        if !agrees(&r.m, &r.lower) || !agrees(&r.big_m, &r.upper) {
            return Err(CertifyFailure::InvalidBounds {
                reason: "m/M disagree with the lower/upper lines".into(),
            });
        }
        QuotientBounds::validated(QuotientBounds {
            shape: r.shape,
            lower: r.lower,
            upper: r.upper,
            n0: r.n0,
        })
    }
}

impl QuotientBounds {
    pub fn constant(m: Rational, big_m: Rational, n0: i64) -> Result<Self, CertifyFailure> {
        Self::validated(QuotientBounds {
            shape: BoundShape::Constant,
            lower: Line::constant(m),
            upper: Line::constant(big_m),
            n0,
        })
    }

    pub fn affine(lower: Line, upper: Line, n0: i64) -> Result<Self, CertifyFailure> {
        Self::validated(QuotientBounds {
            shape: BoundShape::Affine,
            lower,
            upper,
            n0,
        })
    }

    fn validated(b: Self) -> Result<Self, CertifyFailure> {
        b.validate()?;
        Ok(b)
    }

    /// Checks `0 < m(n) <= M(n)` for every `n >= n0`.
    pub fn validate(&self) -> Result<(), CertifyFailure> {
        let bad = |reason: String| Err(CertifyFailure::InvalidBounds { reason });
        if self.shape == BoundShape::Constant
            && !(self.lower.slope.is_zero() && self.upper.slope.is_zero())
        {
            return bad("constant bounds must have zero slope".into());
        }
        if self.lower.slope.is_negative() || !self.lower.at(self.n0).is_positive() {
            return bad(format!("m(n) = {} is not positive for all n >= {}", self.lower, self.n0));
        }
        let gap = &self.upper.poly() - &self.lower.poly();
        if !poly_tail_nonneg(&gap.clear_denominators(), self.n0).holds() {
            return bad(format!("m(n) = {} exceeds M(n) = {} somewhere", self.lower, self.upper));
        }
        Ok(())
    }

    /// `m(n - lag)` as a function of `n`.
    pub(crate) fn lower_at(&self, lag: usize) -> RationalFunction {
        RationalFunction::from_poly(self.lower.poly().shift(-(lag as i64)))
    }

    /// `M(n - lag)` as a function of `n`.
    pub(crate) fn upper_at(&self, lag: usize) -> RationalFunction {
        RationalFunction::from_poly(self.upper.poly().shift(-(lag as i64)))
    }

    pub fn contains(&self, n: i64, x: &Rational) -> bool {
        &self.lower.at(n) <= x && x <= &self.upper.at(n)
    }
}

impl fmt::Display for QuotientBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <= x_n <= {} for n >= {}", self.lower, self.upper, self.n0)
    }
}

/// Bounds together with the evidence that they hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifiedBounds {
    pub bounds: QuotientBounds,
    /// Index from which the inductive step is discharged symbolically.
    pub n_star: i64,
    pub tail_inequalities: Vec<TailInequality>,
    pub base_cases: Vec<BaseCase>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Lower,
    Upper,
}

/// Quotient map `R(n) + S(n)/x_{n-1} + T(n)/(x_{n-1} x_{n-2})` as monomials.
fn quotient_map(rec: &Recurrence) -> Vec<Term> {
    let names = ["R(n)", "S(n)", "T(n)"];
    rec.coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let vars: Vec<(usize, i32)> = (1..=j).map(|lag| (lag, -1)).collect();
            Term::new(names[j], c.clone(), &vars)
        })
        .collect()
}

fn bound_conditions(ctx: &Context, b: &QuotientBounds) -> [(Side, Condition); 2] {
    let map = quotient_map(ctx.rec);
    let lo = ctx.q0.max(b.n0 + 1);
    let m = RationalFunction::from_poly(b.lower.poly());
    let big_m = RationalFunction::from_poly(b.upper.poly());
    let mut lower = map.clone();
    lower.push(Term::pure("-m(n)", -&m));
    let mut upper: Vec<Term> = map
        .into_iter()
        .map(|t| Term {
            label: format!("-{}", t.label),
            coeff: -&t.coeff,
            exps: t.exps,
        })
        .collect();
    upper.push(Term::pure("M(n)", big_m));
    [
        (
            Side::Lower,
            Condition {
                description: "x_n - m(n) >= 0".into(),
                terms: lower,
                side: vec![],
                lo,
            },
        ),
        (
            Side::Upper,
            Condition {
                description: "M(n) - x_n >= 0".into(),
                terms: upper,
                side: vec![],
                lo,
            },
        ),
    ]
}

const SCAN: i64 = 60;

fn outside(n: i64, lo: Rational, x: Rational, hi: Rational) -> CertifyFailure {
    CertifyFailure::BaseCase {
        n,
        relation: "m(n) <= x_n <= M(n)".into(),
        values: vec![lo, x, hi],
    }
}

pub(crate) fn verify_in(
    ctx: &Context,
    b: &QuotientBounds,
) -> Result<VerifiedBounds, (CertifyFailure, Option<Side>)> {
    b.validate().map_err(|f| (f, None))?;
    // a computed quotient outside the envelope refutes it outright
    let scan_end = (b.n0 + SCAN).min(ctx.tab.last_index());
    for n in b.n0..=scan_end {
        if let Some(x) = ctx.x(n) {
            let (lo, hi) = (b.lower.at(n), b.upper.at(n));
            if x < lo || x > hi {
                let side = if x < lo { Side::Lower } else { Side::Upper };
                return Err((outside(n, lo, x, hi), Some(side)));
            }
        }
    }
    let mut n_star = b.n0;
    let mut tail_inequalities = Vec::new();
    for (side, cond) in bound_conditions(ctx, b) {
        let d = discharge(&cond, Some(b)).map_err(|f| (f, Some(side)))?;
        n_star = n_star.max(d.n_star);
        tail_inequalities.extend(d.inequalities);
    }
    ctx.check_range(b.n0, n_star).map_err(|f| (f, None))?;
    let mut base_cases = Vec::new();
    for n in b.n0..n_star {
        let Some(x) = ctx.x(n) else {
            return Err((
                CertifyFailure::Undefined {
                    n,
                    what: "quotient x_n inside the bound range".into(),
                },
                None,
            ));
        };
        let (lo, hi) = (b.lower.at(n), b.upper.at(n));
        if x < lo || x > hi {
            let side = if x < lo { Side::Lower } else { Side::Upper };
            return Err((outside(n, lo, x, hi), Some(side)));
        }
        base_cases.push(BaseCase {
            n,
            relation: BaseRelation::Lower,
            lhs: lo,
            rhs: x.clone(),
        });
        base_cases.push(BaseCase {
            n,
            relation: BaseRelation::Upper,
            lhs: x,
            rhs: hi,
        });
    }
    Ok(VerifiedBounds {
        bounds: b.clone(),
        n_star,
        tail_inequalities,
        base_cases,
    })
}

/// Proves `m(n) <= x_n <= M(n)` for every `n >= n0` by induction through
/// the quotient recurrence. The recurrence must be homogeneous.
pub fn verify_bounds(rec: &Recurrence, b: &QuotientBounds) -> Result<VerifiedBounds, CertifyFailure> {
    let ctx = Context::new(rec, super::DEFAULT_MAX_BASE)?;
    verify_in(&ctx, b).map_err(|(f, _)| f)
}

fn floor_half(r: &Rational) -> Rational {
    floor_to_grid(r, 2)
}

fn ceil_half(r: &Rational) -> Rational {
    ceil_to_grid(r, 2)
}

/// Value of a coefficient function at infinity, `None` when it grows.
fn limit(f: &RationalFunction) -> Option<Rational> {
    let dn = f.numer().degree();
    let dd = f.denom().degree().unwrap_or(0);
    match dn {
        None => Some(Rational::zero()),
        Some(d) if d < dd => Some(Rational::zero()),
        Some(d) if d == dd => Some(f.numer().leading().unwrap() / f.denom().leading().unwrap()),
        _ => None,
    }
}

/// Widens `[m, M]` until the limiting quotient map sends it into itself.
fn close_constant(rec: &Recurrence, mut m: Rational, mut big_m: Rational) -> (Rational, Rational) {
    let lims: Option<Vec<Rational>> = rec.coeffs().iter().map(limit).collect();
    let Some(lims) = lims else {
        return (m, big_m);
    };
    for _ in 0..16 {
        let mut lo = lims[0].clone();
        let mut hi = lims[0].clone();
        for (j, c) in lims.iter().enumerate().skip(1) {
            let (small, large) = (m.pow(j as i32), big_m.pow(j as i32));
            if c.is_negative() {
                lo += c / &small;
                hi += c / &large;
            } else {
                lo += c / &large;
                hi += c / &small;
            }
        }
        let mut changed = false;
        if lo < m {
            let next = floor_half(&lo);
            if next.is_positive() {
                m = next;
                changed = true;
            }
        }
        if hi > big_m {
            big_m = ceil_half(&hi);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    (m, big_m)
}

fn positive_floor(r: &Rational) -> Rational {
    let mut den = 2;
    loop {
        let f = floor_to_grid(r, den);
        if f.is_positive() {
            return f;
        }
        den *= 2;
    }
}

/// Proposes bounds from the quotients observed on a window; the result
/// is not verified.
pub fn propose_bounds(rec: &Recurrence, probe_window: usize) -> Result<QuotientBounds, CertifyFailure> {
    let ctx = Context::new(rec, probe_window.max(super::DEFAULT_MAX_BASE as usize) as i64)?;
    propose_in(&ctx, probe_window)
}

/// Window quotients, skipping the first defined one (often an outlier).
fn window(ctx: &Context, probe_window: usize) -> Result<Vec<(i64, Rational)>, CertifyFailure> {
    let start = ctx.first_x + 1;
    let xs: Vec<(i64, Rational)> = (start..start + probe_window as i64)
        .map_while(|n| ctx.x(n).map(|x| (n, x)))
        .collect();
    if xs.len() < 5 {
        return Err(CertifyFailure::WindowTooShort { usable: xs.len() });
    }
    if let Some((n, _)) = xs.iter().find(|(_, x)| !x.is_positive()) {
        return Err(CertifyFailure::NonPositiveQuotient { n: *n });
    }
    Ok(xs)
}

/// Smallest `n >= first_x` from which every window quotient lies inside.
fn start_inside(ctx: &Context, b: &QuotientBounds, end: i64) -> i64 {
    let mut n0 = ctx.first_x;
    for n in ctx.first_x..=end {
        match ctx.x(n) {
            Some(x) if b.contains(n, &x) => {}
            _ => n0 = n + 1,
        }
    }
    n0
}

pub(crate) fn propose_in(ctx: &Context, probe_window: usize) -> Result<QuotientBounds, CertifyFailure> {
    let xs = window(ctx, probe_window)?;
    let end = xs.last().unwrap().0;
    let mid = &xs[xs.len() / 2];
    let last = xs.last().unwrap();
    let slope = (&last.1 - &mid.1) / Rational::from_integer((last.0 - mid.0).into());
    let half = Rational::new(1.into(), 2.into());

    let mut b = if slope >= half {
        let alpha = slope.round();
        let offsets: Vec<Rational> = xs
            .iter()
            .map(|(n, x)| x - &alpha * Rational::from_integer((*n).into()))
            .collect();
        let lo = offsets.iter().min().unwrap().floor();
        let hi = offsets.iter().max().unwrap().ceil().max(lo.clone() + Rational::one());
        QuotientBounds {
            shape: BoundShape::Affine,
            lower: Line {
                slope: alpha.clone(),
                intercept: lo,
            },
            upper: Line {
                slope: alpha,
                intercept: hi,
            },
            n0: ctx.first_x,
        }
    } else {
        let min = xs.iter().map(|(_, x)| x).min().unwrap();
        let max = xs.iter().map(|(_, x)| x).max().unwrap();
        let m = match floor_half(min) {
            m if m.is_positive() => m,
            _ => positive_floor(min),
        };
        let (m, big_m) = close_constant(ctx.rec, m, ceil_half(max));
        QuotientBounds {
            shape: BoundShape::Constant,
            lower: Line::constant(m),
            upper: Line::constant(big_m),
            n0: ctx.first_x,
        }
    };
    b.n0 = start_inside(ctx, &b, end);
    // affine envelopes may start below zero
    while !b.lower.at(b.n0).is_positive() {
        b.n0 += 1;
    }
    Ok(b)
}

/// Second proposal: a lower bound taken near the end of the window, valid
/// only from where the quotients have climbed above it.
pub(crate) fn propose_tight(ctx: &Context, probe_window: usize) -> Result<QuotientBounds, CertifyFailure> {
    let xs = window(ctx, probe_window)?;
    let end = xs.last().unwrap().0;
    let base = propose_in(ctx, probe_window)?;
    if base.shape == BoundShape::Affine {
        return Ok(base);
    }
    let m = match floor_half(&xs.last().unwrap().1) {
        m if m.is_positive() => m,
        _ => positive_floor(&xs.last().unwrap().1),
    };
    let max = xs.iter().map(|(_, x)| x).filter(|x| **x >= m).max().unwrap();
    let (m, big_m) = close_constant(ctx.rec, m.clone(), ceil_half(max).max(m));
    let mut b = QuotientBounds {
        shape: BoundShape::Constant,
        lower: Line::constant(m),
        upper: Line::constant(big_m),
        n0: ctx.first_x,
    };
    b.n0 = start_inside(ctx, &b, end);
    Ok(b)
}

/// Loosens bounds after a failed verification.
pub(crate) fn widen(b: &QuotientBounds, failure: &CertifyFailure, side: Option<Side>) -> Option<QuotientBounds> {
    let mut out = b.clone();
    let step = match b.shape {
        BoundShape::Constant => Rational::new(1.into(), 2.into()),
        BoundShape::Affine => Rational::one(),
    };
    match (failure, side) {
        (CertifyFailure::BaseCase { n, .. }, _) if n - b.n0 < 3 => out.n0 = n + 1,
        (_, Some(Side::Lower)) => {
            let next = &b.lower.intercept - &step;
            if next.is_positive() || b.shape == BoundShape::Affine {
                out.lower.intercept = next;
            } else {
                out.lower.intercept = &b.lower.intercept / Rational::from_integer(2.into());
            }
            while !out.lower.at(out.n0).is_positive() {
                out.n0 += 1;
                if out.n0 - b.n0 > 1000 {
                    return None;
                }
            }
        }
        (_, Some(Side::Upper)) => out.upper.intercept = &b.upper.intercept + &step,
        _ => return None,
    }
    (out != *b).then_some(out)
}
