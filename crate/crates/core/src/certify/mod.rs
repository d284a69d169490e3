//! Certificates of log-convexity and log-balancedness.
//!
//! A certificate combines verified quotient bounds, polynomial tail
//! inequalities (each decided exactly on an integer tail) and base cases
//! checked by exact comparison of computed quotients.

mod bounds;
mod condition;
mod pipeline;
mod prove;

pub use bounds::{propose_bounds, verify_bounds, BoundShape, Line, QuotientBounds, VerifiedBounds};
pub use condition::{SignDecision, TailSign};
pub use pipeline::{certify_pipeline, Outcome, PipelineError, PipelineOptions, Report, Violation};
pub use prove::{certify_log_balanced, certify_log_convex};

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{compute_terms, EngineError, Recurrence, TermTable};
use crate::exactmath::rational::{as_text, as_text_vec};
use crate::exactmath::{poly_tail_nonneg, Polynomial, Rational, TailCheck};

pub const DEFAULT_MAX_BASE: i64 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    LogConvex,
    LogBalanced,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::LogConvex => "log_convex",
            Property::LogBalanced => "log_balanced",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// `S <= 0`: `∇R(n) x_{n-1} + ∇S(n) >= 0`.
    Prop2,
    /// `S >= 0`: the three-quotient convexity condition.
    Prop3,
    /// `S >= 0`: `Δ_R(n) x_{n-1} + Δ_S(n) >= 0`.
    Prop4,
    /// `S <= 0`: `Δ_R(n) x_{n-1} + Δ̄_S(n) >= 0`.
    Prop5,
    ThreeTermConvex,
    ThreeTermBalanced,
    Order1Direct,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Prop2 => "prop2",
            Method::Prop3 => "prop3",
            Method::Prop4 => "prop4",
            Method::Prop5 => "prop5",
            Method::ThreeTermConvex => "three_term_convex",
            Method::ThreeTermBalanced => "three_term_balanced",
            Method::Order1Direct => "order1_direct",
        }
    }
}

/// `polynomial(n) >= 0` for every integer `n >= n0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailInequality {
    pub description: String,
    pub polynomial: Polynomial,
    pub n0: i64,
}

impl TailInequality {
    pub fn recheck(&self) -> TailCheck {
        poly_tail_nonneg(&self.polynomial, self.n0)
    }
}

/// Which defining inequality a base case instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseRelation {
    /// `m(n) <= x_n`
    Lower,
    /// `x_n <= M(n)`
    Upper,
    /// `x_n <= x_{n+1}`
    Convex,
    /// `x_{n+1} <= (n+1)/n x_n`
    Balanced,
}

/// An instance `lhs <= rhs` of a defining inequality, checked exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseCase {
    pub n: i64,
    pub relation: BaseRelation,
    #[serde(with = "as_text")]
    pub lhs: Rational,
    #[serde(with = "as_text")]
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub property: Property,
    pub method: Method,
    pub bounds: Option<QuotientBounds>,
    /// Index from which the inductive step is discharged by tail inequalities.
    pub n_star: i64,
    pub tail_inequalities: Vec<TailInequality>,
    pub sign_decisions: Vec<SignDecision>,
    pub base_cases: Vec<BaseCase>,
    /// Smallest `h >= 1` such that the defining inequalities hold for all
    /// `n >= h`.
    pub holds_from: i64,
    /// For log-balancedness: smallest `s` such that `(a_{s+k})_{k >= 0}` is
    /// log-balanced.
    pub reindexed_from: Option<i64>,
}

impl Certificate {
    /// Re-decides every tail inequality and recomputes every base case.
    pub fn replay(&self, rec: &Recurrence) -> Result<(), String> {
        for t in &self.tail_inequalities {
            if let TailCheck::FailsAt(n) = t.recheck() {
                return Err(format!("tail inequality `{}` fails at n = {n}", t.description));
            }
        }
        let last = self.base_cases.iter().map(|b| b.n).max().unwrap_or(0);
        let first = rec.offset().max(0);
        let count = usize::try_from(last - first + 3).unwrap_or(0).max(rec.order());
        let tab = compute_terms(rec, count).map_err(|e| e.to_string())?;
        let x = |n: i64| -> Option<Rational> {
            let prev = tab.get(n - 1)?;
            (!prev.is_zero()).then(|| tab.get(n).unwrap() / prev)
        };
        for b in &self.base_cases {
            let n = b.n;
            let expect = match b.relation {
                BaseRelation::Lower => {
                    let bd = self.bounds.as_ref().ok_or("bound base case without bounds")?;
                    x(n).map(|v| (bd.lower.at(n), v))
                }
                BaseRelation::Upper => {
                    let bd = self.bounds.as_ref().ok_or("bound base case without bounds")?;
                    x(n).map(|v| (v, bd.upper.at(n)))
                }
                BaseRelation::Convex => x(n).zip(x(n + 1)),
                BaseRelation::Balanced => x(n)
                    .zip(x(n + 1))
                    .map(|(a, b)| (b, a * Rational::new((n + 1).into(), n.into()))),
            };
            match expect {
                Some((l, r)) if l == b.lhs && r == b.rhs && l <= r => {}
                _ => return Err(format!("base case {:?} at n = {n} does not reproduce", b.relation)),
            }
        }
        Ok(())
    }
}

/// Why a certification step did not succeed. Every variant with an index
/// carries the exact values at that index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertifyFailure {
    #[error("base case fails at n = {n}: {relation}")]
    BaseCase {
        n: i64,
        relation: String,
        #[serde(with = "as_text_vec")]
        values: Vec<Rational>,
    },
    #[error("tail inequality `{description}` fails at n = {witness} (value {value})")]
    Tail {
        description: String,
        polynomial: Polynomial,
        from: i64,
        witness: i64,
        #[serde(with = "as_text")]
        value: Rational,
    },
    #[error("no induction seed: {relation:?} fails at n = {n} ({lhs} > {rhs})")]
    Seed {
        n: i64,
        relation: BaseRelation,
        #[serde(with = "as_text")]
        lhs: Rational,
        #[serde(with = "as_text")]
        rhs: Rational,
    },
    #[error("unsupported: {reason}")]
    Unsupported { reason: String },
    #[error("balance needs a log-convexity certificate")]
    NoConvexityCover,
    #[error("base range of {needed} indices exceeds the limit {max_base}")]
    BaseRangeExceeded { needed: i64, max_base: i64 },
    #[error("invalid bounds: {reason}")]
    InvalidBounds { reason: String },
    #[error("undefined at n = {n}: {what}")]
    Undefined { n: i64, what: String },
    #[error("only {usable} usable quotients in the probe window")]
    WindowTooShort { usable: usize },
    #[error("quotient x_{n} is not positive")]
    NonPositiveQuotient { n: i64 },
    #[error("{message}")]
    Engine { message: String },
}

impl From<EngineError> for CertifyFailure {
    fn from(e: EngineError) -> Self {
        CertifyFailure::Engine {
            message: e.to_string(),
        }
    }
}

/// Exact terms and quotient bookkeeping shared by the proof steps.
pub(crate) struct Context<'a> {
    pub rec: &'a Recurrence,
    pub tab: TermTable,
    /// First index from which every quotient is defined.
    pub first_x: i64,
    /// First index from which `x_n` obeys the quotient recurrence.
    pub q0: i64,
    pub max_base: i64,
}

impl<'a> Context<'a> {
    pub fn new(rec: &'a Recurrence, max_base: i64) -> Result<Self, CertifyFailure> {
        if !rec.is_homogeneous() {
            return Err(CertifyFailure::Unsupported {
                reason: "recurrence must be homogenized first".into(),
            });
        }
        Ok(Self::try_new(rec, max_base)?)
    }

    /// As [`Context::new`] for a homogeneous recurrence, keeping the
    /// engine error.
    pub fn try_new(rec: &'a Recurrence, max_base: i64) -> Result<Self, EngineError> {
        let count = max_base.max(1) as usize + rec.order() + 24;
        let tab = compute_terms(rec, count)?;
        let first_x = crate::engine::quotient_sequence_with_limit(&tab, rec.order())?.first_index;
        let q0 = rec.first_recurrent_index().max(first_x + rec.order() as i64 - 1);
        Ok(Context {
            rec,
            tab,
            first_x,
            q0,
            max_base,
        })
    }

    pub fn x(&self, n: i64) -> Option<Rational> {
        if n < self.first_x {
            return None;
        }
        let prev = self.tab.get(n - 1)?;
        Some(self.tab.get(n)? / prev)
    }

    /// First index at which the defining inequalities can be examined.
    pub fn lo_check(&self) -> i64 {
        (self.rec.offset() + 1).max(1)
    }

    pub fn check_range(&self, lo: i64, n: i64) -> Result<(), CertifyFailure> {
        let needed = n - lo;
        if needed > self.max_base || n + 2 > self.tab.last_index() {
            return Err(CertifyFailure::BaseRangeExceeded {
                needed,
                max_base: self.max_base,
            });
        }
        Ok(())
    }

    /// `x_n <= x_{n+1}` as `(lhs, rhs)`.
    pub fn convex_at(&self, n: i64) -> Option<(Rational, Rational)> {
        Some((self.x(n)?, self.x(n + 1)?))
    }

    /// `x_{n+1} <= (n+1)/n x_n` as `(lhs, rhs)`.
    pub fn balanced_at(&self, n: i64) -> Option<(Rational, Rational)> {
        if n < 1 {
            return None;
        }
        let xn = self.x(n)?;
        Some((self.x(n + 1)?, xn * Rational::new((n + 1).into(), n.into())))
    }
}
