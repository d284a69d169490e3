//! End-to-end certification of one recurrence.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bounds::{propose_in, propose_tight, verify_in, widen, QuotientBounds, VerifiedBounds};
use super::prove::{balanced_in, convex_in};
use super::{BaseRelation, Certificate, CertifyFailure, Context, Property};
use crate::engine::{compute_terms, homogenize, EngineError, Recurrence, MAX_ORDER};
use crate::exactmath::rational::{as_text, as_text_vec};
use crate::exactmath::{MathError, Rational};

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub probe_window: usize,
    pub max_base: i64,
    pub bounds_override: Option<QuotientBounds>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            probe_window: 60,
            max_base: super::DEFAULT_MAX_BASE,
            bounds_override: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    LogBalanced,
    /// Log-convexity certified, log-balancedness not.
    LogConvex,
    NotCertified,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::LogBalanced => "log_balanced",
            Outcome::LogConvex => "log_convex",
            Outcome::NotCertified => "not_certified",
        }
    }
}

/// The last index in the computed window where a defining inequality
/// fails, with the two sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub n: i64,
    pub relation: BaseRelation,
    #[serde(with = "as_text")]
    pub lhs: Rational,
    #[serde(with = "as_text")]
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub input: String,
    pub verdict: Outcome,
    pub holds_from: Option<i64>,
    pub reindexed_from: Option<i64>,
    pub bounds: Option<QuotientBounds>,
    pub homogenized: bool,
    pub certificates: Vec<Certificate>,
    pub failures: Vec<CertifyFailure>,
    pub violations: Vec<Violation>,
    pub terms_offset: i64,
    #[serde(with = "as_text_vec")]
    pub terms_prefix: Vec<Rational>,
}

impl Report {
    pub fn certificate(&self, property: Property) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.property == property)
    }
}

/// Errors that stop the pipeline; certification failures are reported
/// inside the [`Report`] instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("{0}")]
    Engine(EngineError),
}

impl From<EngineError> for PipelineError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Math(m) => PipelineError::Math(m),
            other => PipelineError::Engine(other),
        }
    }
}

const PREFIX_LEN: usize = 20;

#[derive(Default)]
struct Attempt {
    bounds: Option<QuotientBounds>,
    convex: Option<Certificate>,
    balanced: Option<Certificate>,
    failures: Vec<CertifyFailure>,
}

impl Attempt {
    fn rank(&self) -> u8 {
        if self.balanced.is_some() {
            2
        } else if self.convex.is_some() {
            1
        } else {
            0
        }
    }
}

fn prove_with(ctx: &Context, vb: Option<&VerifiedBounds>) -> Attempt {
    let mut a = Attempt {
        bounds: vb.map(|v| v.bounds.clone()),
        ..Attempt::default()
    };
    match convex_in(ctx, vb) {
        Ok(c) => {
            match balanced_in(ctx, vb, &c) {
                Ok(b) => a.balanced = Some(b),
                Err(f) => a.failures.push(f),
            }
            a.convex = Some(c);
        }
        Err(f) => a.failures.push(f),
    }
    a
}

/// Verifies `b`, widening it after failures, then runs both proofs.
fn attempt_from(ctx: &Context, mut b: QuotientBounds, retries: usize) -> Attempt {
    let mut failures = Vec::new();
    for _ in 0..=retries {
        match verify_in(ctx, &b) {
            Ok(vb) => {
                let mut a = prove_with(ctx, Some(&vb));
                failures.append(&mut a.failures);
                a.failures = failures;
                return a;
            }
            Err((f, side)) => {
                let next = widen(&b, &f, side);
                failures.push(f);
                match next {
                    Some(nb) => b = nb,
                    None => break,
                }
            }
        }
    }
    Attempt {
        bounds: Some(b),
        failures,
        ..Attempt::default()
    }
}

fn violations(ctx: &Context, window: usize) -> Vec<Violation> {
    let lo = ctx.lo_check();
    let hi = (lo + window as i64).min(ctx.tab.last_index() - 1);
    let mut out = Vec::new();
    for relation in [BaseRelation::Convex, BaseRelation::Balanced] {
        let last = (lo..hi).rev().find_map(|n| {
            let v = match relation {
                BaseRelation::Convex => ctx.convex_at(n),
                _ => ctx.balanced_at(n),
            }?;
            (v.0 > v.1).then_some((n, v))
        });
        if let Some((n, (lhs, rhs))) = last {
            out.push(Violation { n, relation, lhs, rhs });
        }
    }
    out
}

/// Homogenizes if needed, proposes or takes bounds, verifies them and
/// certifies log-convexity and log-balancedness.
pub fn certify_pipeline(rec: &Recurrence, opts: &PipelineOptions) -> Result<Report, PipelineError> {
    let input = rec.name().unwrap_or("inline").to_string();
    let prefix = compute_terms(rec, PREFIX_LEN.max(rec.order()))?;
    let mut report = Report {
        input,
        verdict: Outcome::NotCertified,
        holds_from: None,
        reindexed_from: None,
        bounds: None,
        homogenized: false,
        certificates: Vec::new(),
        failures: Vec::new(),
        violations: Vec::new(),
        terms_offset: prefix.offset,
        terms_prefix: prefix.terms,
    };

    let homog;
    let rec = if rec.is_homogeneous() {
        rec
    } else if rec.order() == MAX_ORDER {
        report.failures.push(CertifyFailure::Unsupported {
            reason: format!("eliminating the forcing term would exceed order {MAX_ORDER}"),
        });
        return Ok(report);
    } else {
        homog = homogenize(rec)?;
        report.homogenized = true;
        &homog
    };

    let ctx = match Context::try_new(rec, opts.max_base.max(opts.probe_window as i64)) {
        Ok(c) => c,
        Err(e @ (EngineError::Math(_) | EngineError::Pole { .. })) => return Err(e.into()),
        Err(e) => {
            report.failures.push(e.into());
            return Ok(report);
        }
    };
    let ctx = Context {
        max_base: opts.max_base,
        ..ctx
    };
    report.violations = violations(&ctx, opts.probe_window);

    let best = if rec.order() == 1 {
        prove_with(&ctx, None)
    } else if let Some(b) = &opts.bounds_override {
        attempt_from(&ctx, b.clone(), 0)
    } else {
        match propose_in(&ctx, opts.probe_window) {
            Err(f) => Attempt {
                failures: vec![f],
                ..Attempt::default()
            },
            Ok(b) => {
                let first = attempt_from(&ctx, b.clone(), 3);
                if first.rank() == 2 {
                    first
                } else {
                    match propose_tight(&ctx, opts.probe_window) {
                        Ok(t) if t != b => {
                            let second = attempt_from(&ctx, t, 3);
                            if second.rank() > first.rank() {
                                second
                            } else {
                                let mut first = first;
                                first.failures.extend(second.failures);
                                first
                            }
                        }
                        _ => first,
                    }
                }
            }
        }
    };

    report.bounds = best.bounds.clone();
    report.verdict = match best.rank() {
        2 => Outcome::LogBalanced,
        1 => Outcome::LogConvex,
        _ => Outcome::NotCertified,
    };
    let headline = best.balanced.as_ref().or(best.convex.as_ref());
    report.holds_from = headline.map(|c| c.holds_from);
    report.reindexed_from = best.balanced.as_ref().and_then(|c| c.reindexed_from);
    if report.verdict != Outcome::LogBalanced {
        for f in best.failures {
            if !report.failures.contains(&f) {
                report.failures.push(f);
            }
        }
    }
    report.certificates = best.convex.into_iter().chain(best.balanced).collect();
    Ok(report)
}
