//! Finite-window classification of log-behavior and the double inequalities
//! implied by log-balancedness.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

use crate::engine::TermTable;
use crate::exactmath::rational::{as_text, as_text_vec, binomial};
use crate::exactmath::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("window of {0} terms is too short; at least 3 are needed")]
    WindowTooShort(usize),
    #[error("term a_{0} is not positive")]
    NonPositive(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    LogConvex,
    LogConcave,
    LogStraight,
    LogFibonacci,
    Mixed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::LogConvex => "log_convex",
            Verdict::LogConcave => "log_concave",
            Verdict::LogStraight => "log_straight",
            Verdict::LogFibonacci => "log_fibonacci",
            Verdict::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// First and last index of the window.
    pub window: (i64, i64),
    /// For `mixed`, the first interior index breaking every pattern.
    pub witness: Option<i64>,
}

/// Sign of `a_n^2 - a_{n-1} a_{n+1}`.
fn curvature(prev: &Rational, cur: &Rational, next: &Rational) -> Ordering {
    (cur * cur).cmp(&(prev * next))
}

pub fn classify(tab: &TermTable) -> Result<Classification, AnalysisError> {
    if tab.len() < 3 {
        return Err(AnalysisError::WindowTooShort(tab.len()));
    }
    if let Some((n, _)) = tab.indexed().find(|(_, a)| !a.is_positive()) {
        return Err(AnalysisError::NonPositive(n));
    }
    let signs: Vec<(i64, Ordering)> = tab
        .terms
        .windows(3)
        .enumerate()
        .map(|(k, w)| (tab.offset + k as i64 + 1, curvature(&w[0], &w[1], &w[2])))
        .collect();
    let window = (tab.offset, tab.last_index());
    let all = |f: fn(Ordering) -> bool| signs.iter().all(|&(_, s)| f(s));
    let verdict = if all(|s| s == Ordering::Equal) {
        Verdict::LogStraight
    } else if all(|s| s != Ordering::Greater) {
        Verdict::LogConvex
    } else if all(|s| s != Ordering::Less) {
        Verdict::LogConcave
    } else if all(|s| s != Ordering::Equal)
        && signs.windows(2).all(|w| w[0].1 != w[1].1)
    {
        Verdict::LogFibonacci
    } else {
        Verdict::Mixed
    };
    let witness = (verdict == Verdict::Mixed).then(|| mixed_witness(&signs));
    Ok(Classification {
        verdict,
        window,
        witness,
    })
}

/// First index where the curvature signs stop fitting both a one-signed
/// and a strictly alternating pattern.
fn mixed_witness(signs: &[(i64, Ordering)]) -> i64 {
    let mut seen_less = false;
    let mut seen_greater = false;
    let mut alternating = true;
    let mut prev: Option<Ordering> = None;
    for &(n, s) in signs {
        seen_less |= s == Ordering::Less;
        seen_greater |= s == Ordering::Greater;
        if s == Ordering::Equal || prev == Some(s) {
            alternating = false;
        }
        prev = Some(s);
        if seen_less && seen_greater && !alternating {
            return n;
        }
    }
    signs.last().map_or(0, |&(n, _)| n)
}

/// `a_n^2 <= a_{n-1} a_{n+1} <= (1 + 1/n) a_n^2` failing at `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartAViolation {
    pub n: i64,
    #[serde(with = "as_text")]
    pub lhs: Rational,
    #[serde(with = "as_text")]
    pub mid: Rational,
    #[serde(with = "as_text")]
    pub rhs: Rational,
}

/// `a_n a_m <= a_{n+m} <= C(n+m, n) a_n a_m` failing at `(n, m)`.
/// `values` holds the three sides in that order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartBViolation {
    pub n: i64,
    pub m: i64,
    #[serde(with = "as_text_vec")]
    pub values: Vec<Rational>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop1Report {
    pub part_a_violations: Vec<PartAViolation>,
    pub part_b_violations: Vec<PartBViolation>,
    pub part_b_applicable: bool,
}

impl Prop1Report {
    pub fn is_clean(&self) -> bool {
        self.part_a_violations.is_empty() && self.part_b_violations.is_empty()
    }
}

/// Checks both double inequalities on the whole table.
pub fn check_prop1(tab: &TermTable, max_sum: i64) -> Prop1Report {
    check_prop1_from(tab, max_sum, 1)
}

/// As [`check_prop1`], with part (a) checked only for `n >= from`.
pub fn check_prop1_from(tab: &TermTable, max_sum: i64, from: i64) -> Prop1Report {
    let mut report = Prop1Report::default();
    let start = from.max(1).max(tab.offset + 1);
    for n in start..tab.last_index() {
        let (prev, cur, next) = (&tab.terms_at(n - 1), &tab.terms_at(n), &tab.terms_at(n + 1));
        let lhs = cur * cur;
        let mid = prev * next;
        let rhs = &lhs * Rational::new((n + 1).into(), n.into());
        if lhs > mid || mid > rhs {
            report.part_a_violations.push(PartAViolation { n, lhs, mid, rhs });
        }
    }

    report.part_b_applicable = tab.offset == 0 && tab.get(0).is_some_and(|a| a.is_one());
    if report.part_b_applicable {
        let top = max_sum.min(tab.last_index());
        for s in 0..=top {
            for n in 0..=s {
                let m = s - n;
                let prod = tab.terms_at(n) * tab.terms_at(m);
                let joint = tab.terms_at(s);
                let cap = &prod * Rational::from_integer(binomial(s as u64, n as u64));
                if prod > joint || joint > cap {
                    report.part_b_violations.push(PartBViolation {
                        n,
                        m,
                        values: vec![prod, joint, cap],
                    });
                }
            }
        }
    }
    report
}

trait TermsAt {
    fn terms_at(&self, n: i64) -> Rational;
}

impl TermsAt for TermTable {
    fn terms_at(&self, n: i64) -> Rational {
        self.get(n).cloned().unwrap_or_else(Rational::zero)
    }
}
