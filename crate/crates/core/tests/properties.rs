mod common;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use logbal::certify::{certify_pipeline, verify_bounds, PipelineOptions};
use logbal::engine::{compute_terms, homogenize, quotient_sequence, Recurrence};
use logbal::exactmath::rational::{frac, int, rat_arith, RatOp};
use logbal::exactmath::{poly_tail_nonneg, ratfunc_tail_sign, DetKind, Polynomial, Rational, RationalFunction, SignClass};
use logbal::recdsl::parse_recurrence;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-60i64..60, 1i64..40).prop_map(|(p, q)| frac(p, q))
}

fn small_poly(max_deg: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(-30i64..30, 1..=max_deg + 1).prop_map(|c| Polynomial::from_ints(&c))
}

fn small_ratfunc() -> impl Strategy<Value = RationalFunction> {
    (small_poly(3), small_poly(2))
        .prop_filter("nonzero denominator", |(_, d)| !d.is_zero())
        .prop_map(|(n, d)| RationalFunction::new(n, d).unwrap())
}

/// `(a n + b) / (n + d)` with a positive tail.
fn positive_coeff() -> impl Strategy<Value = RationalFunction> {
    (0i64..6, 1i64..8, 1i64..5)
        .prop_map(|(a, b, d)| RationalFunction::new(Polynomial::from_ints(&[b, a]), Polynomial::from_ints(&[d, 1])).unwrap())
}

fn is_canonical(r: &Rational) -> bool {
    r.denom().is_positive() && r.numer().gcd(r.denom()).is_one()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_results_are_canonical(a in small_rational(), b in small_rational()) {
        for op in [RatOp::Add, RatOp::Sub, RatOp::Mul, RatOp::Div] {
            if let Ok(r) = rat_arith(op, &a, &b) {
                prop_assert!(is_canonical(&r));
            } else {
                prop_assert!(b.is_zero());
            }
        }
    }

    #[test]
    fn tail_check_agrees_with_brute_force(p in small_poly(4), n0 in -5i64..10) {
        let brute = (n0..=n0 + 2000).all(|n| !p.eval_int(n).is_negative())
            && p.leading().is_none_or(|c| !c.is_negative());
        prop_assert_eq!(poly_tail_nonneg(&p, n0).holds(), brute);
    }

    #[test]
    fn forward_diff_pointwise(f in small_ratfunc()) {
        let d = f.forward_diff();
        for n in 0..=100i64 {
            if let (Ok(a), Ok(b)) = (f.eval_int(n), f.eval_int(n + 1)) {
                prop_assert_eq!(d.eval_int(n).unwrap(), b - a);
            }
        }
    }

    #[test]
    fn weighted_det_pointwise(f in small_ratfunc()) {
        let delta = f.weighted_det(DetKind::Delta);
        let bar = f.weighted_det(DetKind::DeltaBar);
        for n in 1..=100i64 {
            if let (Ok(a), Ok(b)) = (f.eval_int(n), f.eval_int(n + 1)) {
                let (nn, n1, nm) = (int(n), int(n + 1), int(n - 1));
                prop_assert_eq!(delta.eval_int(n).unwrap(), &n1 * &a - &nn * &b);
                prop_assert_eq!(bar.eval_int(n).unwrap(), &n1 * &a - &nm * &b);
            }
        }
    }

    #[test]
    fn tail_sign_agrees_with_evaluation(f in small_ratfunc(), n0 in 0i64..8) {
        match ratfunc_tail_sign(&f, n0) {
            Err(_) => {
                let has_pole = (n0..=n0 + 2000).any(|n| f.eval_int(n).is_err())
                    || logbal::exactmath::tail::first_integer_root(f.denom(), n0).is_some();
                prop_assert!(has_pole);
            }
            Ok(class) => {
                for n in n0..=n0 + 2000 {
                    let v = f.eval_int(n).unwrap();
                    let ok = match class {
                        SignClass::Positive => v.is_positive(),
                        SignClass::Nonnegative => !v.is_negative(),
                        SignClass::Zero => v.is_zero(),
                        SignClass::Nonpositive => !v.is_positive(),
                        SignClass::Negative => v.is_negative(),
                        SignClass::Varies => true,
                    };
                    prop_assert!(ok, "{:?} but F({}) = {}", class, n, v);
                }
            }
        }
    }

    #[test]
    fn quotients_obey_the_quotient_recurrence(r in positive_coeff(), s in positive_coeff(), a0 in 1i64..5, a1 in 1i64..5) {
        let rec = Recurrence::new(vec![r.clone(), s.clone()], None, 0, vec![int(a0), int(a1)]).unwrap();
        let tab = compute_terms(&rec, 60).unwrap();
        let q = quotient_sequence(&tab).unwrap();
        for n in 2..tab.last_index() {
            let x = q.get(n).unwrap();
            let prev = q.get(n - 1).unwrap();
            prop_assert_eq!(x.clone(), r.eval_int(n).unwrap() + s.eval_int(n).unwrap() / prev);
        }
        prop_assert_eq!(compute_terms(&rec, 60).unwrap(), tab);
    }

    #[test]
    fn order3_quotients_obey_the_quotient_recurrence(r in positive_coeff(), s in positive_coeff(), t in positive_coeff()) {
        let rec = Recurrence::new(vec![r.clone(), s.clone(), t.clone()], None, 0, vec![int(1), int(2), int(3)]).unwrap();
        let tab = compute_terms(&rec, 40).unwrap();
        let q = quotient_sequence(&tab).unwrap();
        for n in 3..tab.last_index() {
            let (x1, x2) = (q.get(n - 1).unwrap(), q.get(n - 2).unwrap());
            let want = r.eval_int(n).unwrap() + s.eval_int(n).unwrap() / x1 + t.eval_int(n).unwrap() / (x1 * x2);
            prop_assert_eq!(q.get(n).unwrap().clone(), want);
        }
    }

    #[test]
    fn homogenize_preserves_terms(r in positive_coeff(), s in positive_coeff(), h in positive_coeff(), order in 1usize..3) {
        let coeffs = if order == 1 { vec![r] } else { vec![r, s] };
        let initials = (1..=order as i64).map(int).collect();
        let rec = Recurrence::new(coeffs, Some(h), 0, initials).unwrap();
        let hom = homogenize(&rec).unwrap();
        prop_assert_eq!(compute_terms(&rec, 50).unwrap(), compute_terms(&hom, 50).unwrap());
    }

    #[test]
    fn parser_never_panics(text in "[a-n0-9\\[\\]=;+*/^() -]{0,40}") {
        if let Err(e) = parse_recurrence(&text) {
            let _ = e.position();
        }
    }
}

proptest! {
    // each case runs the full pipeline and a 500-index exact sweep
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificates_are_sound(r in positive_coeff(), s in positive_coeff(), negate in any::<bool>(), a1 in 1i64..6) {
        let s = if negate { -&s } else { s };
        let Ok(rec) = Recurrence::new(vec![r, s], None, 0, vec![int(1), int(a1)]) else { return Ok(()) };
        let Ok(report) = certify_pipeline(&rec, &PipelineOptions::default()) else { return Ok(()) };
        for c in &report.certificates {
            prop_assert!(common::sweep(&rec, c, common::SWEEP).is_ok(), "{:?} fails the sweep", c.property);
            c.replay(&rec).unwrap();
        }
        if let Some(b) = report.certificates.first().and_then(|c| c.bounds.clone()) {
            prop_assert!(common::bounds_respected(&rec, &b, common::SWEEP).is_ok());
        }
    }

    #[test]
    fn order1_certificates_are_sound(r in positive_coeff()) {
        let rec = Recurrence::new(vec![r], None, 0, vec![int(1)]).unwrap();
        let report = certify_pipeline(&rec, &PipelineOptions::default()).unwrap();
        for c in &report.certificates {
            prop_assert!(common::sweep(&rec, c, common::SWEEP).is_ok(), "{:?} fails the sweep", c.property);
        }
    }

    #[test]
    fn verified_bounds_hold(r in positive_coeff(), s in positive_coeff(), a1 in 1i64..6) {
        let rec = Recurrence::new(vec![r, s], None, 0, vec![int(1), int(a1)]).unwrap();
        if let Ok(b) = logbal::certify::propose_bounds(&rec, 40) {
            if let Ok(vb) = verify_bounds(&rec, &b) {
                prop_assert!(common::bounds_respected(&rec, &vb.bounds, common::SWEEP).is_ok());
            }
        }
    }
}
