//! Recurrence data model, exact term tables and quotient sequences.

use num_traits::Zero;
use thiserror::Error;

use crate::exactmath::tail::first_integer_root;
use crate::exactmath::{MathError, Rational, RationalFunction};

pub const MAX_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("recurrence order {0} is outside 1..=3")]
    Order(usize),
    #[error("expected {expected} initial values, got {got}")]
    InitialCount { expected: usize, got: usize },
    #[error("negative start offset {0}")]
    NegativeOffset(i64),
    #[error("coefficient {which} has a pole at n = {n}")]
    Pole { which: String, n: i64 },
    #[error("term count {count} is smaller than the recurrence order {order}")]
    CountTooSmall { count: usize, order: usize },
    #[error("quotient sequence undefined: every term is zero")]
    UndefinedQuotient,
    #[error("term a_{0} is zero after the initial values; quotient sequence undefined")]
    InteriorZero(i64),
    #[error("recurrence is already homogeneous")]
    AlreadyHomogeneous,
    #[error("nonhomogeneous term vanishes at n = {0}; elimination impossible")]
    Elimination(i64),
}

/// `a_n = sum_j coeffs[j](n) a_{n-1-j} + nonhomog(n)` for `n >= offset + order`,
/// with `initials[k] = a_{offset + k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recurrence {
    coeffs: Vec<RationalFunction>,
    nonhomog: Option<RationalFunction>,
    offset: i64,
    initials: Vec<Rational>,
    name: Option<String>,
}

const COEFF_NAMES: [&str; MAX_ORDER] = ["R", "S", "T"];

impl Recurrence {
    pub fn new(
        coeffs: Vec<RationalFunction>,
        nonhomog: Option<RationalFunction>,
        offset: i64,
        initials: Vec<Rational>,
    ) -> Result<Self, EngineError> {
        let order = coeffs.len();
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(EngineError::Order(order));
        }
        if initials.len() != order {
            return Err(EngineError::InitialCount {
                expected: order,
                got: initials.len(),
            });
        }
        if offset < 0 {
            return Err(EngineError::NegativeOffset(offset));
        }
        let start = offset + order as i64;
        for (j, c) in coeffs.iter().enumerate() {
            if let Some(n) = first_integer_root(c.denom(), start) {
                return Err(EngineError::Pole {
                    which: COEFF_NAMES[j].to_string(),
                    n,
                });
            }
        }
        if let Some(h) = &nonhomog {
            if let Some(n) = first_integer_root(h.denom(), start) {
                return Err(EngineError::Pole {
                    which: "nonhomogeneous term".to_string(),
                    n,
                });
            }
        }
        Ok(Recurrence {
            coeffs,
            nonhomog,
            offset,
            initials,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[RationalFunction] {
        &self.coeffs
    }

    /// Coefficient of `a_{n-lag}` (lag 1 is `R`).
    pub fn coeff(&self, lag: usize) -> Option<&RationalFunction> {
        lag.checked_sub(1).and_then(|j| self.coeffs.get(j))
    }

    pub fn nonhomog(&self) -> Option<&RationalFunction> {
        self.nonhomog.as_ref()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.nonhomog.is_none()
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn initials(&self) -> &[Rational] {
        &self.initials
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// First index computed by the recurrence rather than given.
    pub fn first_recurrent_index(&self) -> i64 {
        self.offset + self.order() as i64
    }
}

/// Exact terms `a_offset, a_offset+1, ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermTable {
    pub offset: i64,
    pub terms: Vec<Rational>,
}

impl TermTable {
    pub fn new(offset: i64, terms: Vec<Rational>) -> Self {
        TermTable { offset, terms }
    }

    pub fn get(&self, n: i64) -> Option<&Rational> {
        let k = n.checked_sub(self.offset)?;
        usize::try_from(k).ok().and_then(|k| self.terms.get(k))
    }

    /// Index of the last stored term.
    pub fn last_index(&self) -> i64 {
        self.offset + self.terms.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn indexed(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.terms
            .iter()
            .enumerate()
            .map(move |(k, t)| (self.offset + k as i64, t))
    }
}

pub fn compute_terms(rec: &Recurrence, count: usize) -> Result<TermTable, EngineError> {
    let order = rec.order();
    if count < order {
        return Err(EngineError::CountTooSmall { count, order });
    }
    let mut terms = rec.initials.clone();
    terms.reserve(count - order);
    for k in order..count {
        let n = rec.offset + k as i64;
        let mut acc = match &rec.nonhomog {
            Some(h) => h.eval_int(n).map_err(|_| EngineError::Pole {
                which: "nonhomogeneous term".to_string(),
                n,
            })?,
            None => Rational::zero(),
        };
        for (j, c) in rec.coeffs.iter().enumerate() {
            let prev = &terms[k - 1 - j];
            if prev.is_zero() || c.is_zero() {
                continue;
            }
            let v = c.eval_int(n).map_err(|_| EngineError::Pole {
                which: COEFF_NAMES[j].to_string(),
                n,
            })?;
            acc += v * prev;
        }
        terms.push(acc);
    }
    Ok(TermTable::new(rec.offset, terms))
}

/// `x_n = a_n / a_{n-1}` for `n >= first_index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientTable {
    pub first_index: i64,
    pub quotients: Vec<Rational>,
    /// Quotient positions dropped because a term in the prefix was zero.
    pub skipped: usize,
}

impl QuotientTable {
    pub fn get(&self, n: i64) -> Option<&Rational> {
        let k = n.checked_sub(self.first_index)?;
        usize::try_from(k).ok().and_then(|k| self.quotients.get(k))
    }

    pub fn last_index(&self) -> i64 {
        self.first_index + self.quotients.len() as i64 - 1
    }

    pub fn indexed(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.quotients
            .iter()
            .enumerate()
            .map(move |(k, x)| (self.first_index + k as i64, x))
    }
}

/// Builds the quotient table, skipping the longest prefix that ends in a
/// zero term. Zeros are tolerated among the first `zero_window` terms only
/// (the initial values); a later zero is an error.
pub fn quotient_sequence_with_limit(
    tab: &TermTable,
    zero_window: usize,
) -> Result<QuotientTable, EngineError> {
    let last_zero = tab.terms.iter().rposition(|t| t.is_zero());
    if let Some(z) = last_zero {
        if z >= zero_window {
            if tab.terms[..z].iter().all(|t| t.is_zero()) && z + 1 == tab.terms.len() {
                return Err(EngineError::UndefinedQuotient);
            }
            return Err(EngineError::InteriorZero(tab.offset + z as i64));
        }
    }
    let start = last_zero.map_or(0, |z| z + 1);
    if start + 1 >= tab.terms.len() {
        return Err(EngineError::UndefinedQuotient);
    }
    let quotients = tab.terms[start..]
        .windows(2)
        .map(|w| &w[1] / &w[0])
        .collect();
    Ok(QuotientTable {
        first_index: tab.offset + start as i64 + 1,
        quotients,
        skipped: start,
    })
}

/// Quotient table of a term table, tolerating zeros anywhere in a prefix
/// that is followed by nonzero terms only.
pub fn quotient_sequence(tab: &TermTable) -> Result<QuotientTable, EngineError> {
    if tab.terms.iter().all(|t| t.is_zero()) {
        return Err(EngineError::UndefinedQuotient);
    }
    quotient_sequence_with_limit(tab, tab.terms.len())
}

/// Quotient table for a recurrence: zeros are allowed among the initial
/// values only.
pub fn recurrence_quotients(rec: &Recurrence, count: usize) -> Result<QuotientTable, EngineError> {
    let tab = compute_terms(rec, count)?;
    if tab.terms.iter().all(|t| t.is_zero()) {
        return Err(EngineError::UndefinedQuotient);
    }
    quotient_sequence_with_limit(&tab, rec.order())
}

/// Eliminates the nonhomogeneous part, raising the order by one.
///
/// Order 1: `a_n = R a_{n-1} + S` becomes
/// `a_n = (R(n) + S(n)/S(n-1)) a_{n-1} - R(n-1) S(n)/S(n-1) a_{n-2}`.
/// Order 2: `a_n = R a_{n-1} + S a_{n-2} + T` becomes, with
/// `rho = T(n)/T(n-1)`, the coefficients
/// `[R + rho, S - rho R(n-1), -rho S(n-1)]`.
pub fn homogenize(rec: &Recurrence) -> Result<Recurrence, EngineError> {
    let h = rec.nonhomog.as_ref().ok_or(EngineError::AlreadyHomogeneous)?;
    let order = rec.order();
    if order >= MAX_ORDER {
        return Err(EngineError::Order(order + 1));
    }
    // rho(n) = h(n)/h(n-1) is needed for n >= offset + order + 1
    let first_divisor = rec.offset + order as i64;
    if h.is_zero() {
        return Err(EngineError::Elimination(first_divisor));
    }
    if let Some(n) = first_integer_root(h.numer(), first_divisor) {
        return Err(EngineError::Elimination(n));
    }
    let rho = h.checked_div(&h.shift(-1))?;
    let mut coeffs = Vec::with_capacity(order + 1);
    for j in 0..=order {
        // new_j = old_j - rho * old_{j-1}(n-1), with old_{-1} = -1
        let own = rec.coeffs.get(j).cloned().unwrap_or_default();
        let prev = if j == 0 {
            RationalFunction::from_int(-1)
        } else {
            rec.coeffs[j - 1].shift(-1)
        };
        coeffs.push(&own - &(&rho * &prev));
    }
    let extended = compute_terms(rec, order + 1)?;
    let out = Recurrence::new(coeffs, None, rec.offset, extended.terms)?;
    Ok(match &rec.name {
        Some(n) => out.with_name(n.clone()),
        None => out,
    })
}
