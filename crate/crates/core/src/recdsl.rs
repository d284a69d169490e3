//! Text format for recurrences.
//!
//! ```text
//! spec        := rule (";" init)+ [";"]
//! rule        := "a[n]" "=" signed_term { ("+"|"-") term }
//! term        := coeff "*" ref | ref | coeff
//! ref         := "a[n-" INT "]"            INT in 1..3
//! init        := "a[" INT "]" "=" rational_literal
//! coeff       := INT, "n", + - * / ^INT and parentheses
//! ```
//!
//! `^` binds tightest, then unary minus, then `*` `/`, then `+` `-`.
//! Whitespace is insignificant and `#` starts a comment running to the end
//! of the line. Coefficient-only terms are summed into the nonhomogeneous
//! part.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

use crate::engine::{EngineError, Recurrence, MAX_ORDER};
use crate::exactmath::{Polynomial, Rational, RationalFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: expected {expected}, found {found}")]
    Syntax {
        pos: usize,
        line: usize,
        col: usize,
        expected: String,
        found: String,
    },
    #[error("{line}:{col}: {message}")]
    Semantic {
        pos: usize,
        line: usize,
        col: usize,
        message: String,
    },
    #[error("missing initial condition a[{0}]")]
    MissingInitial(i64),
    #[error("no initial conditions given")]
    NoInitials,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl ParseError {
    /// Byte offset into the source, when the error has one.
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::Semantic { pos, .. } => Some(*pos),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    N,
    A,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eq,
    Semi,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::N => "`n`".into(),
            Tok::A => "`a`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
}

impl<'a> Lexer<'a> {
    fn tokenize(&self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let bytes = self.src.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            if c == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let v: BigInt = self.src[start..i].parse().expect("digits");
                out.push((Tok::Int(v), start));
                continue;
            }
            let tok = match c {
                b'n' => Tok::N,
                b'a' => Tok::A,
                b'[' => Tok::LBrack,
                b']' => Tok::RBrack,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'/' => Tok::Slash,
                b'^' => Tok::Caret,
                b'=' => Tok::Eq,
                b';' => Tok::Semi,
                _ => {
                    let ch = self.src[i..].chars().next().unwrap();
                    let (line, col) = line_col(self.src, i);
                    return Err(ParseError::Syntax {
                        pos: i,
                        line,
                        col,
                        expected: "a token".into(),
                        found: format!("character `{ch}`"),
                    });
                }
            };
            // identifiers are single letters; reject words like `an`
            if matches!(tok, Tok::N | Tok::A)
                && bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric())
            {
                let (line, col) = line_col(self.src, i);
                let end = self.src[i..]
                    .find(|ch: char| !ch.is_ascii_alphanumeric())
                    .map_or(self.src.len(), |k| i + k);
                return Err(ParseError::Syntax {
                    pos: i,
                    line,
                    col,
                    expected: "`n` or `a[...]`".into(),
                    found: format!("identifier `{}`", &self.src[i..end]),
                });
            }
            out.push((tok, i));
            i += 1;
        }
        out.push((Tok::Eof, self.src.len()));
        Ok(out)
    }
}

fn line_col(src: &str, pos: usize) -> (usize, usize) {
    let before = &src[..pos.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(pos, |k| pos - k - 1) + 1;
    (line, col)
}

/// Linear form `sum_lag coeff * a[n-lag] + constant` built while parsing.
#[derive(Clone, Debug, Default)]
struct Linear {
    refs: BTreeMap<usize, RationalFunction>,
    constant: RationalFunction,
}

impl Linear {
    fn pure(f: RationalFunction) -> Self {
        Linear {
            refs: BTreeMap::new(),
            constant: f,
        }
    }

    fn lag(lag: usize) -> Self {
        let mut refs = BTreeMap::new();
        refs.insert(lag, RationalFunction::from_int(1));
        Linear {
            refs,
            constant: RationalFunction::zero(),
        }
    }

    fn is_pure(&self) -> bool {
        self.refs.is_empty()
    }

    fn add(mut self, other: Linear) -> Linear {
        for (k, v) in other.refs {
            let e = self.refs.entry(k).or_default();
            *e = &*e + &v;
        }
        self.constant = &self.constant + &other.constant;
        self
    }

    fn neg(self) -> Linear {
        self.scale(&RationalFunction::from_int(-1))
    }

    fn scale(self, f: &RationalFunction) -> Linear {
        Linear {
            refs: self.refs.into_iter().map(|(k, v)| (k, &v * f)).collect(),
            constant: &self.constant * f,
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax(&self, expected: &str) -> ParseError {
        let pos = self.pos();
        let (line, col) = line_col(self.src, pos);
        ParseError::Syntax {
            pos,
            line,
            col,
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn semantic(&self, pos: usize, message: impl Into<String>) -> ParseError {
        let (line, col) = line_col(self.src, pos);
        ParseError::Semantic {
            pos,
            line,
            col,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(&tok.describe()))
        }
    }

    fn int(&mut self) -> Result<BigInt, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(v)
            }
            _ => Err(self.syntax("an integer")),
        }
    }

    fn small_int(&mut self) -> Result<i64, ParseError> {
        let pos = self.pos();
        let v = self.int()?;
        v.to_i64()
            .ok_or_else(|| self.semantic(pos, format!("integer {v} is too large")))
    }

    fn spec(&mut self) -> Result<Recurrence, ParseError> {
        let (body, order) = self.rule()?;
        let mut inits: BTreeMap<i64, Rational> = BTreeMap::new();
        let mut seen_init = false;
        while *self.peek() == Tok::Semi {
            self.bump();
            if *self.peek() == Tok::Eof && seen_init {
                break;
            }
            let pos = self.pos();
            let (k, v) = self.init()?;
            if inits.insert(k, v).is_some() {
                return Err(self.semantic(pos, format!("duplicate initial condition a[{k}]")));
            }
            seen_init = true;
        }
        if *self.peek() != Tok::Eof {
            return Err(self.syntax(if seen_init { "`;` or end of input" } else { "`;`" }));
        }
        let offset = *inits.keys().next().ok_or(ParseError::NoInitials)?;
        let mut initials = Vec::with_capacity(order);
        for k in offset..offset + order as i64 {
            initials.push(inits.remove(&k).ok_or(ParseError::MissingInitial(k))?);
        }
        if let Some((&k, _)) = inits.iter().next() {
            return Err(ParseError::Semantic {
                pos: 0,
                line: 1,
                col: 1,
                message: format!(
                    "initial condition a[{k}] is outside a[{offset}]..a[{}]",
                    offset + order as i64 - 1
                ),
            });
        }
        let coeffs = (1..=order)
            .map(|lag| body.refs.get(&lag).cloned().unwrap_or_default())
            .collect();
        let nonhomog = (!body.constant.is_zero()).then_some(body.constant);
        Ok(Recurrence::new(coeffs, nonhomog, offset, initials)?)
    }

    fn rule(&mut self) -> Result<(Linear, usize), ParseError> {
        self.expect(Tok::A)?;
        self.expect(Tok::LBrack)?;
        self.expect(Tok::N)?;
        self.expect(Tok::RBrack)?;
        self.expect(Tok::Eq)?;
        let mut total = Linear::default();
        let mut first = true;
        loop {
            let negate = if first {
                if *self.peek() == Tok::Minus {
                    self.bump();
                    true
                } else {
                    false
                }
            } else {
                match self.peek() {
                    Tok::Plus => {
                        self.bump();
                        false
                    }
                    Tok::Minus => {
                        self.bump();
                        true
                    }
                    _ => break,
                }
            };
            first = false;
            let pos = self.pos();
            let mut term = self.product()?;
            if negate {
                term = term.neg();
            }
            for lag in term.refs.keys() {
                if total.refs.contains_key(lag) {
                    return Err(self.semantic(pos, format!("duplicate lag a[n-{lag}]")));
                }
            }
            total = total.add(term);
        }
        let order = total.refs.keys().copied().max().unwrap_or(0);
        if order == 0 {
            return Err(self.semantic(0, "rule has no a[n-k] term"));
        }
        Ok((total, order))
    }

    fn init(&mut self) -> Result<(i64, Rational), ParseError> {
        self.expect(Tok::A)?;
        self.expect(Tok::LBrack)?;
        let k = self.small_int()?;
        self.expect(Tok::RBrack)?;
        self.expect(Tok::Eq)?;
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let p = self.int()?;
        let value = if *self.peek() == Tok::Slash {
            self.bump();
            let pos = self.pos();
            let q = self.int()?;
            if q.is_zero() {
                return Err(self.semantic(pos, "zero denominator in initial value"));
            }
            Rational::new(p, q)
        } else {
            Rational::from_integer(p)
        };
        Ok((k, if neg { -value } else { value }))
    }

    /// sum := product { ("+"|"-") product }   (inside parentheses)
    fn sum(&mut self) -> Result<Linear, ParseError> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(self.product()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.add(self.product()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    /// product := unary { ("*"|"/") unary }
    fn product(&mut self) -> Result<Linear, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let pos = self.pos();
                    let rhs = self.unary()?;
                    acc = match (acc.is_pure(), rhs.is_pure()) {
                        (true, _) => rhs.scale(&acc.constant),
                        (false, true) => acc.scale(&rhs.constant),
                        (false, false) => {
                            return Err(self.semantic(pos, "product of two sequence terms is not linear"))
                        }
                    };
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    let rhs = self.unary()?;
                    if !rhs.is_pure() {
                        return Err(self.semantic(pos, "cannot divide by a sequence term"));
                    }
                    let inv = rhs
                        .constant
                        .recip()
                        .map_err(|_| self.semantic(pos, "denominator is identically zero"))?;
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    /// unary := "-" unary | power
    fn unary(&mut self) -> Result<Linear, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    /// power := atom [ "^" INT ]
    fn power(&mut self) -> Result<Linear, ParseError> {
        let base_pos = self.pos();
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let e = self.small_int()?;
        if !base.is_pure() {
            return Err(self.semantic(base_pos, "cannot raise a sequence term to a power"));
        }
        let e = u32::try_from(e)
            .ok()
            .filter(|&e| e <= 64)
            .ok_or_else(|| self.semantic(pos, "exponent must be an integer in 0..=64"))?;
        Ok(Linear::pure(base.constant.pow(e)))
    }

    fn atom(&mut self) -> Result<Linear, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Linear::pure(RationalFunction::constant(Rational::from_integer(v))))
            }
            Tok::N => {
                self.bump();
                Ok(Linear::pure(RationalFunction::from_poly(Polynomial::var())))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::A => self.reference(),
            _ => Err(self.syntax("a term")),
        }
    }

    fn reference(&mut self) -> Result<Linear, ParseError> {
        let pos = self.pos();
        self.expect(Tok::A)?;
        self.expect(Tok::LBrack)?;
        self.expect(Tok::N)?;
        if *self.peek() == Tok::RBrack {
            return Err(self.semantic(pos, "a[n] cannot appear on the right-hand side"));
        }
        self.expect(Tok::Minus)?;
        let lag_pos = self.pos();
        let lag = self.small_int()?;
        self.expect(Tok::RBrack)?;
        if lag < 1 {
            return Err(self.semantic(lag_pos, format!("lag {lag} must be at least 1")));
        }
        if lag as usize > MAX_ORDER {
            return Err(self.semantic(
                lag_pos,
                format!("lag {lag} exceeds the maximum order {MAX_ORDER}"),
            ));
        }
        Ok(Linear::lag(lag as usize))
    }
}

pub fn parse_recurrence(text: &str) -> Result<Recurrence, ParseError> {
    let toks = Lexer { src: text }.tokenize()?;
    Parser {
        src: text,
        toks,
        at: 0,
    }
    .spec()
}

/// Prints a recurrence so that [`parse_recurrence`] reads it back.
pub fn format_recurrence(rec: &Recurrence) -> String {
    let mut out = String::new();
    if let Some(name) = rec.name() {
        let _ = writeln!(out, "# {name}");
    }
    out.push_str("a[n] =");
    for (j, c) in rec.coeffs().iter().enumerate() {
        let sep = if j == 0 { " " } else { " + " };
        let _ = write!(out, "{sep}{c}*a[n-{}]", j + 1);
    }
    if let Some(h) = rec.nonhomog() {
        let _ = write!(out, " + {h}");
    }
    for (k, v) in rec.initials().iter().enumerate() {
        let _ = write!(out, "; a[{}]={}", rec.offset() + k as i64, v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::compute_terms;
    use crate::exactmath::rational::int;

    const MOTZKIN: &str =
        "a[n] = ((2*n+1)/(n+2))*a[n-1] + ((3*(n-1))/(n+2))*a[n-2]; a[0]=1; a[1]=1";

    #[test]
    fn parses_motzkin() {
        let rec = parse_recurrence(MOTZKIN).unwrap();
        assert_eq!(rec.order(), 2);
        assert_eq!(rec.coeffs()[0], RationalFunction::from_ints(&[1, 2], &[2, 1]).unwrap());
        assert_eq!(rec.coeffs()[1], RationalFunction::from_ints(&[-3, 3], &[2, 1]).unwrap());
        assert_eq!(
            compute_terms(&rec, 7).unwrap().terms,
            [1, 1, 2, 4, 9, 21, 51].map(int).to_vec()
        );
    }

    #[test]
    fn parses_first_order_and_forcing() {
        let rec = parse_recurrence("a[n] = 2*a[n-1]; a[0]=1").unwrap();
        assert_eq!(rec.order(), 1);
        assert_eq!(rec.coeffs()[0].constant_value(), Some(int(2)));
        assert!(rec.is_homogeneous());

        let rec = parse_recurrence("a[n] = n*a[n-1] + 1; a[0]=1").unwrap();
        assert_eq!(rec.nonhomog().unwrap().constant_value(), Some(int(1)));
    }

    #[test]
    fn syntax_error_at_end_of_input() {
        let err = parse_recurrence("a[n] = a[n-1] +").unwrap_err();
        match err {
            ParseError::Syntax { pos, found, .. } => {
                assert_eq!(pos, 15);
                assert_eq!(found, "end of input");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(
            parse_recurrence("a[n] = a[n-4]; a[0]=1; a[1]=1; a[2]=1; a[3]=1"),
            Err(ParseError::Semantic { .. })
        ));
        assert!(matches!(
            parse_recurrence("a[n] = a[n-1] + 2*a[n-1]; a[0]=1"),
            Err(ParseError::Semantic { ref message, .. }) if message.contains("duplicate lag")
        ));
        assert_eq!(
            parse_recurrence("a[n] = a[n-1] + a[n-2]; a[0]=1"),
            Err(ParseError::MissingInitial(1))
        );
        assert!(matches!(
            parse_recurrence("a[n] = a[n-1]; a[0]=1; a[0]=2"),
            Err(ParseError::Semantic { ref message, .. }) if message.contains("duplicate initial")
        ));
        assert!(matches!(
            parse_recurrence("a[n] = (1/(n-n))*a[n-1]; a[0]=1"),
            Err(ParseError::Semantic { ref message, .. }) if message.contains("identically zero")
        ));
        assert!(matches!(
            parse_recurrence("a[n] = a[n-1]*a[n-2]; a[0]=1; a[1]=1"),
            Err(ParseError::Semantic { .. })
        ));
        assert!(matches!(parse_recurrence("a[n] = a[n-1] $"), Err(ParseError::Syntax { .. })));
        assert_eq!(parse_recurrence("a[n] = a[n-1]"), Err(ParseError::NoInitials));
    }

    #[test]
    fn precedence() {
        // -n^2 is -(n^2); 2*n/4 is n/2
        let rec = parse_recurrence("a[n] = (-n^2 + 2*n/4)*a[n-1]; a[0]=1").unwrap();
        let c = &rec.coeffs()[0];
        for n in 0..6 {
            let x = int(n);
            assert_eq!(c.eval(&x).unwrap(), -(&x * &x) + &x / int(2));
        }
    }

    #[test]
    fn unary_minus_and_binary_minus_agree() {
        let a = parse_recurrence("a[n] = 2*a[n-1] - ((n-1)/n)*a[n-2]; a[0]=1; a[1]=1").unwrap();
        let b = parse_recurrence("a[n] = 2*a[n-1] + (-(n-1)/n)*a[n-2]; a[0]=1; a[1]=1").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn offset_and_comments() {
        let rec = parse_recurrence(
            "# directed column-convex polyominoes\na[n] = (n+2)*a[n-1] - (n-1)*a[n-2];\n a[1]=1; a[2]=3;",
        )
        .unwrap();
        assert_eq!(rec.offset(), 1);
        assert_eq!(compute_terms(&rec, 3).unwrap().terms, [1, 3, 13].map(int).to_vec());
    }

    #[test]
    fn format_round_trip() {
        let apery = "a[n] = ((34*n^3 - 51*n^2 + 27*n - 5)/n^3)*a[n-1] - ((n-1)^3/n^3)*a[n-2]; a[0]=1; a[1]=5";
        for src in [MOTZKIN, apery, "a[n] = n*a[n-1] + 1; a[3]=7/2", "a[n] = 0*a[n-3] + a[n-1]; a[0]=1; a[1]=2; a[2]=3"] {
            let rec = parse_recurrence(src).unwrap();
            let text = format_recurrence(&rec);
            let back = parse_recurrence(&text).unwrap();
            assert_eq!(back, rec, "{text}");
        }
        let two = parse_recurrence("a[n] = 2*a[n-1]; a[0]=1").unwrap();
        assert_eq!(format_recurrence(&two), "a[n] = (2)*a[n-1]; a[0]=1");
    }
}
