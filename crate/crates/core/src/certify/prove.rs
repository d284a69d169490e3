//! Convexity and balance steps.
//!
//! Each step is a condition `E(n) >= 0` whose truth for `n >= n_star`,
//! together with `d` preceding instances of the defining inequality, yields
//! the next instance. Smaller indices are settled by exact comparison.

use super::bounds::VerifiedBounds;
use super::condition::{discharge, distribute, eventual_sign, Condition, SideCondition, TailSign, Term};
use super::{BaseCase, BaseRelation, Certificate, CertifyFailure, Context, Method, Property};
use crate::engine::Recurrence;
use crate::exactmath::{DetKind, Rational, RationalFunction};

fn side(label: &str, f: RationalFunction, want: TailSign) -> SideCondition {
    SideCondition {
        label: label.to_string(),
        f,
        want,
    }
}

/// Sign class of `S` used to pick the argument; zero counts as either.
fn s_sign(ctx: &Context) -> TailSign {
    eventual_sign(&ctx.rec.coeffs()[1], ctx.q0).0
}

/// Condition, method and the number `d` of preceding instances it uses.
fn convex_condition(ctx: &Context) -> Result<(Method, Condition, i64), CertifyFailure> {
    let c = ctx.rec.coeffs();
    let q0 = ctx.q0;
    let dr = c[0].forward_diff();
    Ok(match c.len() {
        1 => (
            Method::Order1Direct,
            Condition {
                description: "∇R(n) >= 0".into(),
                terms: vec![Term::pure("∇R(n)", dr)],
                side: vec![],
                lo: q0,
            },
            0,
        ),
        2 => {
            let s = &c[1];
            let ds = s.forward_diff();
            if s_sign(ctx) == TailSign::Nonnegative {
                let terms = vec![
                    Term::new("∇R(n)", dr.clone(), &[(0, 1), (1, 1), (2, 1)]),
                    Term::new("∇S(n)", ds.clone(), &[(1, 1), (2, 1)]),
                    Term::new("-S(n)∇R(n-1)", -&(s * &dr.shift(-1)), &[(2, 1)]),
                    Term::pure("-S(n)∇S(n-1)", -&(s * &ds.shift(-1))),
                ];
                (
                    Method::Prop3,
                    Condition {
                        description: "∇R(n)x_n x_{n-1} x_{n-2} + ∇S(n)x_{n-1}x_{n-2} - S(n)[∇R(n-1)x_{n-2} + ∇S(n-1)] >= 0".into(),
                        terms,
                        side: vec![side("S(n)", s.clone(), TailSign::Nonnegative)],
                        lo: q0 + 1,
                    },
                    2,
                )
            } else {
                (
                    Method::Prop2,
                    Condition {
                        description: "∇R(n)x_{n-1} + ∇S(n) >= 0".into(),
                        terms: vec![Term::new("∇R(n)", dr, &[(1, 1)]), Term::pure("∇S(n)", ds)],
                        side: vec![side("S(n+1)", s.shift(1), TailSign::Nonpositive)],
                        lo: q0,
                    },
                    1,
                )
            }
        }
        _ => {
            let (s, t) = (&c[1], &c[2]);
            let (ds, dt) = (s.forward_diff(), t.forward_diff());
            let ub = |k: i64, lag: usize| {
                vec![
                    Term::pure(format!("∇R(n{k})"), dr.shift(k)),
                    Term::new(format!("∇S(n{k})"), ds.shift(k), &[(lag, -1)]),
                    Term::new(format!("∇T(n{k})"), dt.shift(k), &[(lag, -1), (lag + 1, -1)]),
                ]
            };
            let (ub1, ub2) = (ub(-1, 1), ub(-2, 2));
            let mut terms = vec![
                Term::new("∇R(n)", dr.clone(), &[(0, 1), (1, 1), (2, 1)]),
                Term::new("∇S(n)", ds.clone(), &[(1, 1), (2, 1)]),
                Term::new("∇T(n)", dt.clone(), &[(2, 1)]),
            ];
            terms.extend(distribute("-S(n)", &-s, &[(2, 1)], &ub1));
            terms.extend(distribute("-T(n)", &-t, &[], &ub1));
            terms.extend(distribute("-T(n)", &-t, &[], &ub2));
            (
                Method::ThreeTermConvex,
                Condition {
                    description: "three-term convexity condition >= 0".into(),
                    terms,
                    side: vec![
                        side("S(n-2)", s.shift(-2), TailSign::Nonnegative),
                        side("T(n-2)", t.shift(-2), TailSign::Nonnegative),
                    ],
                    lo: q0 + 2,
                },
                4,
            )
        }
    })
}

/// Condition, method, induction depth `d` on balance, and how many
/// preceding convexity instances it needs.
fn balanced_condition(ctx: &Context) -> (Method, Condition, i64, i64) {
    let c = ctx.rec.coeffs();
    let lo = ctx.q0.max(1);
    let delta = |f: &RationalFunction| f.weighted_det(DetKind::Delta);
    let dr = delta(&c[0]);
    match c.len() {
        1 => (
            Method::Order1Direct,
            Condition {
                description: "Δ_R(n) >= 0".into(),
                terms: vec![Term::pure("Δ_R(n)", dr)],
                side: vec![],
                lo,
            },
            0,
            0,
        ),
        2 => {
            let s = &c[1];
            if s_sign(ctx) == TailSign::Nonpositive {
                (
                    Method::Prop5,
                    Condition {
                        description: "Δ_R(n)x_{n-1} + Δ̄_S(n) >= 0".into(),
                        terms: vec![
                            Term::new("Δ_R(n)", dr, &[(1, 1)]),
                            Term::pure("Δ̄_S(n)", s.weighted_det(DetKind::DeltaBar)),
                        ],
                        side: vec![side("S(n+1)", s.shift(1), TailSign::Nonpositive)],
                        lo: lo.max(2),
                    },
                    1,
                    0,
                )
            } else {
                (
                    Method::Prop4,
                    Condition {
                        description: "Δ_R(n)x_{n-1} + Δ_S(n) >= 0".into(),
                        terms: vec![Term::new("Δ_R(n)", dr, &[(1, 1)]), Term::pure("Δ_S(n)", delta(s))],
                        side: vec![side("S(n+1)", s.shift(1), TailSign::Nonnegative)],
                        lo,
                    },
                    0,
                    1,
                )
            }
        }
        _ => {
            let (s, t) = (&c[1], &c[2]);
            (
                Method::ThreeTermBalanced,
                Condition {
                    description: "Δ_R(n)x_{n-1}x_{n-2} + Δ_S(n)x_{n-2} + Δ_T(n) >= 0".into(),
                    terms: vec![
                        Term::new("Δ_R(n)", dr, &[(1, 1), (2, 1)]),
                        Term::new("Δ_S(n)", delta(s), &[(2, 1)]),
                        Term::pure("Δ_T(n)", delta(t)),
                    ],
                    side: vec![
                        side("S(n+1)", s.shift(1), TailSign::Nonnegative),
                        side("T(n+1)", t.shift(1), TailSign::Nonnegative),
                    ],
                    lo,
                },
                0,
                2,
            )
        }
    }
}

struct Settled {
    holds_from: i64,
    n_star: i64,
    base_cases: Vec<BaseCase>,
}

/// Checks the defining inequality below `n_star`. When one of the `d`
/// seeds just below `n_star` fails, the induction restarts above it.
fn settle(
    ctx: &Context,
    relation: BaseRelation,
    mut n_star: i64,
    d: i64,
) -> Result<Settled, CertifyFailure> {
    let lo = ctx.lo_check();
    n_star = n_star.max(lo);
    let pred = |n: i64| match relation {
        BaseRelation::Convex => ctx.convex_at(n),
        _ => ctx.balanced_at(n),
    };
    loop {
        ctx.check_range(lo, n_star)?;
        let mut last_fail = None;
        let mut cases = Vec::new();
        for n in lo..n_star {
            match pred(n) {
                Some((lhs, rhs)) if lhs <= rhs => cases.push(BaseCase { n, relation, lhs, rhs }),
                other => last_fail = Some((n, other)),
            }
        }
        match last_fail {
            Some((f, values)) if f >= n_star - d => {
                let next = f + d + 1;
                if ctx.check_range(lo, next).is_err() {
                    let (lhs, rhs) = values.unwrap_or_default();
                    return Err(CertifyFailure::Seed { n: f, relation, lhs, rhs });
                }
                n_star = next;
            }
            _ => {
                let holds_from = last_fail.map_or(lo, |(f, _)| f + 1);
                cases.retain(|c| c.n >= holds_from);
                return Ok(Settled {
                    holds_from,
                    n_star,
                    base_cases: cases,
                });
            }
        }
    }
}

fn with_bounds_evidence(
    vb: Option<&VerifiedBounds>,
    mut cert: Certificate,
) -> Certificate {
    if let Some(vb) = vb {
        let mut ineqs = vb.tail_inequalities.clone();
        ineqs.append(&mut cert.tail_inequalities);
        cert.tail_inequalities = ineqs;
        let mut cases = vb.base_cases.clone();
        cases.append(&mut cert.base_cases);
        cert.base_cases = cases;
        cert.bounds = Some(vb.bounds.clone());
    }
    cert
}

fn bounds_for<'b>(ctx: &Context, vb: Option<&'b VerifiedBounds>) -> Result<Option<&'b VerifiedBounds>, CertifyFailure> {
    if ctx.rec.order() > 1 && vb.is_none() {
        return Err(CertifyFailure::Unsupported {
            reason: "recurrences of order 2 and 3 need verified bounds".into(),
        });
    }
    Ok(vb)
}

pub(crate) fn convex_in(ctx: &Context, vb: Option<&VerifiedBounds>) -> Result<Certificate, CertifyFailure> {
    let vb = bounds_for(ctx, vb)?;
    let (method, cond, d) = convex_condition(ctx)?;
    let disc = discharge(&cond, vb.map(|v| &v.bounds))?;
    let settled = settle(ctx, BaseRelation::Convex, disc.n_star, d)?;
    Ok(with_bounds_evidence(
        vb,
        Certificate {
            property: Property::LogConvex,
            method,
            bounds: None,
            n_star: settled.n_star,
            tail_inequalities: disc.inequalities,
            sign_decisions: disc.signs,
            base_cases: settled.base_cases,
            holds_from: settled.holds_from,
            reindexed_from: None,
        },
    ))
}

pub(crate) fn balanced_in(
    ctx: &Context,
    vb: Option<&VerifiedBounds>,
    convex: &Certificate,
) -> Result<Certificate, CertifyFailure> {
    if convex.property != Property::LogConvex {
        return Err(CertifyFailure::NoConvexityCover);
    }
    let vb = bounds_for(ctx, vb)?;
    let (method, cond, d, dep) = balanced_condition(ctx);
    let disc = discharge(&cond, vb.map(|v| &v.bounds))?;
    let n_star = disc.n_star.max(convex.holds_from + dep);
    let settled = settle(ctx, BaseRelation::Balanced, n_star, d)?;
    let holds_from = settled.holds_from.max(convex.holds_from);
    let mut base_cases: Vec<BaseCase> = convex
        .base_cases
        .iter()
        .filter(|b| b.relation != BaseRelation::Convex || b.n >= holds_from)
        .cloned()
        .collect();
    base_cases.extend(settled.base_cases.into_iter().filter(|b| b.n >= holds_from));
    // bounds evidence already travels inside the convexity certificate
    let mut tail_inequalities = convex.tail_inequalities.clone();
    tail_inequalities.extend(disc.inequalities);
    let mut sign_decisions = convex.sign_decisions.clone();
    sign_decisions.extend(disc.signs);
    Ok(Certificate {
        property: Property::LogBalanced,
        method,
        bounds: convex.bounds.clone(),
        n_star: settled.n_star,
        tail_inequalities,
        sign_decisions,
        base_cases,
        holds_from,
        reindexed_from: Some(reindexed_from(ctx, holds_from)),
    })
}

/// Smallest `s` such that `(a_{s+k})_{k >= 0}` is log-balanced, given that
/// the defining inequalities hold for all `n >= h`. For `s + k >= h` the
/// shifted inequalities follow from the unshifted ones, because
/// `(k+1)/k >= (s+k+1)/(s+k)`.
fn reindexed_from(ctx: &Context, h: i64) -> i64 {
    let start = ctx.rec.offset();
    (start..h)
        .find(|&s| {
            (1..h - s).all(|k| {
                let n = s + k;
                match (ctx.x(n), ctx.x(n + 1)) {
                    (Some(a), Some(b)) => {
                        a <= b && &b * Rational::from_integer(k.into()) <= a * Rational::from_integer((k + 1).into())
                    }
                    _ => false,
                }
            })
        })
        .unwrap_or(h.max(start))
}

/// Certifies `x_n <= x_{n+1}` for all large `n`. Orders 2 and 3 need
/// verified bounds; order 1 does not.
pub fn certify_log_convex(rec: &Recurrence, vb: Option<&VerifiedBounds>) -> Result<Certificate, CertifyFailure> {
    let ctx = Context::new(rec, super::DEFAULT_MAX_BASE)?;
    convex_in(&ctx, vb)
}

/// Certifies `x_n <= x_{n+1} <= (n+1)/n x_n` for all large `n`, on top of
/// a convexity certificate.
pub fn certify_log_balanced(
    rec: &Recurrence,
    vb: Option<&VerifiedBounds>,
    convex: &Certificate,
) -> Result<Certificate, CertifyFailure> {
    let ctx = Context::new(rec, super::DEFAULT_MAX_BASE)?;
    balanced_in(&ctx, vb, convex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog_get;
    use crate::certify::bounds::{verify_bounds, QuotientBounds};
    use crate::exactmath::rational::int;
    use crate::recdsl::parse_recurrence;

    fn order1(text: &str) -> Recurrence {
        parse_recurrence(text).unwrap()
    }

    #[test]
    fn shifted_factorial_up_is_balanced() {
        let rec = order1("a[n] = (n+1)*a[n-1]; a[0]=1");
        let c = certify_log_convex(&rec, None).unwrap();
        let b = certify_log_balanced(&rec, None, &c).unwrap();
        assert_eq!(b.method, Method::Order1Direct);
        assert_eq!(b.holds_from, 1);
    }

    #[test]
    fn shifted_factorial_down_fails_with_minus_one() {
        let rec = order1("a[n] = (n-1)*a[n-1]; a[2]=1");
        let c = certify_log_convex(&rec, None).unwrap();
        match certify_log_balanced(&rec, None, &c) {
            Err(CertifyFailure::Tail { value, .. }) => assert_eq!(value, int(-1)),
            other => panic!("expected a tail failure, got {other:?}"),
        }
    }

    #[test]
    fn decreasing_order1_quotients_fail() {
        let rec = order1("a[n] = ((n+2)/(n+1))*a[n-1]; a[0]=1");
        assert!(matches!(certify_log_convex(&rec, None), Err(CertifyFailure::Tail { .. })));
    }

    #[test]
    fn motzkin_via_prop3_and_prop4() {
        let rec = catalog_get("motzkin").unwrap().recurrence;
        let b = QuotientBounds::constant(int(2), crate::exactmath::rational::frac(7, 2), 2).unwrap();
        let vb = verify_bounds(&rec, &b).unwrap();
        let c = certify_log_convex(&rec, Some(&vb)).unwrap();
        assert_eq!(c.method, Method::Prop3);
        let bal = certify_log_balanced(&rec, Some(&vb), &c).unwrap();
        assert_eq!(bal.method, Method::Prop4);
        assert_eq!(bal.holds_from, 1);
        let ds = bal.sign_decisions.iter().find(|s| s.label == "Δ_S(n)").unwrap();
        assert_eq!(ds.from, 3);
        bal.replay(&rec).unwrap();
    }

    #[test]
    fn schroeder_uses_prop5() {
        let rec = catalog_get("schroeder").unwrap().recurrence;
        let vb = verify_bounds(&rec, &QuotientBounds::constant(int(3), int(6), 2).unwrap()).unwrap();
        let c = certify_log_convex(&rec, Some(&vb)).unwrap();
        assert_eq!(c.method, Method::Prop2);
        let bal = certify_log_balanced(&rec, Some(&vb), &c).unwrap();
        assert_eq!(bal.method, Method::Prop5);
        let dbar = RationalFunction::from_ints(&[5, -2], &[2, 1]).unwrap();
        let s = &rec.coeffs()[1];
        assert_eq!(s.weighted_det(DetKind::DeltaBar), dbar);
    }

    #[test]
    fn order2_needs_bounds() {
        let rec = catalog_get("motzkin").unwrap().recurrence;
        assert!(certify_log_convex(&rec, None).is_err());
    }

    #[test]
    fn fine_reindexes_to_two() {
        let rec = catalog_get("fine").unwrap().recurrence;
        let vb = verify_bounds(&rec, &QuotientBounds::constant(int(3), int(6), 4).unwrap()).unwrap();
        let c = certify_log_convex(&rec, Some(&vb)).unwrap();
        let bal = certify_log_balanced(&rec, Some(&vb), &c).unwrap();
        assert_eq!(bal.holds_from, 4);
        assert_eq!(bal.reindexed_from, Some(2));
    }
}
