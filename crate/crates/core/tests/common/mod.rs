#![allow(dead_code)]

use logbal::certify::{Certificate, Property, QuotientBounds};
use logbal::engine::{compute_terms, Recurrence, TermTable};
use logbal::exactmath::Rational;
use num_bigint::{BigInt, Sign};

pub const SWEEP: i64 = 500;

pub fn terms_through(rec: &Recurrence, last: i64) -> TermTable {
    let count = (last - rec.offset() + 1).max(rec.order() as i64) as usize;
    compute_terms(rec, count).expect("terms")
}

pub fn quotient(tab: &TermTable, n: i64) -> Rational {
    tab.get(n).unwrap() / tab.get(n - 1).unwrap()
}

/// Checks the defining inequalities of `cert.property` exactly on
/// `[holds_from, holds_from + span]`.
pub fn sweep(rec: &Recurrence, cert: &Certificate, span: i64) -> Result<(), String> {
    let h = cert.holds_from;
    let tab = terms_through(rec, h + span + 2);
    sweep_table(&tab, cert.property, h, span)
}

/// Positive terms compared by cross-multiplication, avoiding the gcd work
/// of rational division: `x_n <= x_{n+1}` iff `a_n^2 <= a_{n-1} a_{n+1}`.
pub fn sweep_table(tab: &TermTable, property: Property, h: i64, span: i64) -> Result<(), String> {
    let parts = |n: i64| {
        let v = tab.get(n).expect("term in table");
        (v.numer().clone(), v.denom().clone())
    };
    let mut prev = parts(h - 1);
    let mut cur = parts(h);
    for n in h..=h + span {
        let next = parts(n + 1);
        if prev.0.sign() != Sign::Plus || cur.0.sign() != Sign::Plus || next.0.sign() != Sign::Plus {
            return Err(format!("nonpositive term near n = {n}"));
        }
        // a_n^2 and a_{n-1} a_{n+1} over the common denominator q_n^2 q_{n-1} q_{n+1}
        let square = &cur.0 * &cur.0 * &prev.1 * &next.1;
        let outer = &prev.0 * &next.0 * &cur.1 * &cur.1;
        if square > outer {
            return Err(format!("x_{n} > x_{}", n + 1));
        }
        if property == Property::LogBalanced && outer * BigInt::from(n) > square * BigInt::from(n + 1) {
            return Err(format!("x_{} > (n+1)/n x_{n} at n = {n}", n + 1));
        }
        prev = cur;
        cur = next;
    }
    Ok(())
}

/// `m(n) <= x_n <= M(n)` exactly on `[n0, n0 + span]`.
pub fn bounds_respected(rec: &Recurrence, b: &QuotientBounds, span: i64) -> Result<(), String> {
    bounds_respected_in(&terms_through(rec, b.n0 + span), b, span)
}

pub fn bounds_respected_in(tab: &TermTable, b: &QuotientBounds, span: i64) -> Result<(), String> {
    for n in b.n0..=b.n0 + span {
        let x = quotient(tab, n);
        if x < b.lower.at(n) || x > b.upper.at(n) {
            return Err(format!("x_{n} = {x} escapes {b}"));
        }
    }
    Ok(())
}
