mod common;

use common::gen::*;

use std::f64::consts::PI;

use bibo_core::expr::parse;
use bibo_core::laplace::{invert, InversionConfig};
use bibo_core::singularities::{winding_number_expr, Rect, WindingOptions};
use bibo_core::stability::{integral_tests, log_grid, SampledSignal};
use bibo_core::{AsymExpansion, Exponent, SingularityClass, Term, TransferExpr, C64};
use common::c;
use proptest::prelude::*;

// ---------- expansion algebra ----------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_laws(a in arb_expansion(), b in arb_expansion(), d in arb_expansion()) {
        check_ring_laws(&a, &b, &d)?;
    }

    #[test]
    fn reciprocal_is_inverse(a in arb_expansion()) {
        let r = a.reciprocal().unwrap();
        let one = a.mul(&r).unwrap();
        let biggest = |x: &AsymExpansion| x.terms().iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        assert_close_at(&one, &AsymExpansion::one(c(0.0, 0.0)), biggest(&a) * biggest(&r))?;
    }

    #[test]
    fn time_terms_vanish_on_nonnegative_integers(a in arb_expansion()) {
        for t in a.time_domain_terms().unwrap().terms {
            prop_assert!(!t.kappa.is_nonneg_integer() || t.coeff == c(0.0, 0.0), "{:?}", t);
        }
    }

    #[test]
    fn polar_closed_loop_iff_open_loop_starts_at_minus_one(a in arb_expansion(), minus_one in any::<bool>()) {
        let a = if minus_one {
            let mut terms = vec![Term::new(Exponent::int(0), c(-1.0, 0.0))];
            terms.extend(a.terms().iter().filter(|t| t.kappa.is_positive()));
            match AsymExpansion::new(c(0.0, 0.0), terms, a.kappa_max()) {
                Ok(x) => x,
                Err(_) => return Ok(()),
            }
        } else {
            a
        };
        let lead = a.leading().unwrap();
        let starts_at_minus_one = lead.kappa.is_zero()
            && (lead.coeff - c(-1.0, 0.0)).norm() < 1e-12
            && a.terms().iter().any(|t| !t.kappa.is_integer());
        let closed = match a.closed_loop_map() {
            Ok(x) => x,
            Err(_) => return Ok(()),
        };
        if closed.terms().is_empty() {
            return Ok(());
        }
        prop_assert_eq!(closed.classify().unwrap() == SingularityClass::PolarBranchPoint, starts_at_minus_one);
    }

    #[test]
    fn closed_loop_map_matches_finite_sums(a in arb_expansion(), eps in 1e-5f64..1e-3) {
        prop_assume!(a.kappa_max().to_f64() - a.leading().unwrap().kappa.to_f64() >= 2.0);
        let closed = match a.closed_loop_map() {
            Ok(x) if !x.terms().is_empty() => x,
            _ => return Ok(()),
        };
        let order = closed.kappa_max().to_f64() - closed.leading().unwrap().kappa.to_f64();
        let err = |e: f64| {
            let s = c(e, 0.0);
            let av = a.eval_partial(s);
            let direct = av / (c(1.0, 0.0) + av);
            (closed.eval_partial(s) - direct).norm() / direct.norm()
        };
        let (e1, e2) = (err(eps), err(eps / 4.0));
        // Shrinking ε by 4 must shrink the error like ε^order, up to a
        // factor for the next term still competing.
        prop_assert!(e2 <= 4.0 * e1 * 4f64.powf(-order) + 1e-12, "{} -> {} at order {}", e1, e2, order);
    }
}

// ---------- expressions ----------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derivative_matches_central_difference(sh in arb_shape(), re in 0.2f64..3.0, im in -3.0f64..3.0) {
        check_derivative(&sh, c(re, im))?;
    }

    #[test]
    fn print_parse_round_trip(sh in arb_shape(), re in 0.2f64..3.0, im in -3.0f64..3.0) {
        let f = match build(&sh) { Some(f) => f, None => return Ok(()) };
        // Parsing folds constant subtrees, so the canonical form is the
        // printed text of the parsed tree.
        let g = parse(&f.to_string()).unwrap();
        let text = g.to_string();
        prop_assert_eq!(parse(&text).unwrap().to_string(), text.clone());
        let s = c(re, im);
        if let (Ok(a), Ok(b)) = (f.eval(s), g.eval(s)) {
            if finite(a) && finite(b) {
                prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0), "{}", text);
            }
        }
    }

    #[test]
    fn conjugate_symmetry(sh in arb_shape(), re in 0.2f64..3.0, im in 0.1f64..3.0) {
        prop_assume!(!has_complex_const(&sh));
        let f = match build(&sh) { Some(f) => f, None => return Ok(()) };
        let s = c(re, im);
        if let (Ok(a), Ok(b)) = (f.eval(s), f.eval(s.conj())) {
            if finite(a) && finite(b) && a.norm() < 1e100 {
                prop_assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1e-300), "{}", f);
            }
        }
    }

    #[test]
    fn power_nodes_continuous_off_their_cut(k in -2.5f64..2.5, re in 0.01f64..3.0, im in -3.0f64..3.0, d in 0.0f64..6.3) {
        let f = TransferExpr::power(TransferExpr::var(), k).unwrap();
        let s = c(re, im);
        let t = s + C64::from_polar(1e-9 * s.norm(), d);
        let (a, b) = (f.eval(s).unwrap(), f.eval(t).unwrap());
        prop_assert!((a - b).norm() <= 1e-6 * a.norm());
    }
}

// ---------- argument principle ----------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn zero_count_is_additive_over_subdivision(
        roots in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..6),
        cut in -2.0f64..2.0,
    ) {
        let rect = Rect { re_min: -2.5, re_max: 2.5, im_min: -2.5, im_max: 2.5 };
        for (x, y) in &roots {
            let near_edge = (x.abs() - 2.5).abs() < 0.05 || (y.abs() - 2.5).abs() < 0.05 || (x - cut).abs() < 0.05;
            prop_assume!(!near_edge);
        }
        let poly = TransferExpr::product(
            roots.iter().map(|(x, y)| TransferExpr::var().plus(TransferExpr::constant(c(-x, -y)).unwrap())).collect(),
        );
        let f = TransferExpr::quotient(TransferExpr::real(1.0), poly.clone()).unwrap();
        let inside = roots.iter().filter(|(x, y)| x.abs() < 2.5 && y.abs() < 2.5).count() as i64;
        let opts = WindingOptions::default();
        let whole = winding_number_expr(&poly, rect, &opts).unwrap().count;
        let left = winding_number_expr(&poly, Rect { re_max: cut, ..rect }, &opts).unwrap().count;
        let right = winding_number_expr(&poly, Rect { re_min: cut, ..rect }, &opts).unwrap().count;
        prop_assert_eq!(whole, inside);
        prop_assert_eq!(left + right, whole);
        prop_assert_eq!(winding_number_expr(&f, rect, &opts).unwrap().count, -inside);
    }
}

// ---------- inverse Laplace transform ----------

#[test]
fn inverse_laplace_known_pairs() {
    let times = log_grid(0.1, 10.0, 8, f64::INFINITY);
    for (src, exact) in known_pairs() {
        let f = parse(src).unwrap();
        let inv = invert(&f, &InversionConfig::new(times.clone())).unwrap();
        for s in &inv.samples {
            let v = s.value.unwrap_or_else(|| panic!("{} at t = {}: no value", src, s.t));
            let want = exact(s.t);
            let err = (v - c(want, 0.0)).norm() / want.abs();
            assert!(err < 1e-4, "{} at t = {}: {} vs {} (rel {})", src, s.t, v.re, want, err);
            assert!(!s.flagged, "{} flagged at t = {}", src, s.t);
        }
    }
}

#[test]
fn inverse_laplace_is_linear() {
    let times = vec![0.3, 1.0, 3.0, 7.0];
    let cfg = InversionConfig::new(times);
    let (f, g) = (parse("1/(s+1)^0.5").unwrap(), parse("s/(s^2+4)").unwrap());
    let h = parse("2*(1/(s+1)^0.5) - 3*(s/(s^2+4))").unwrap();
    let (a, b, ab) = (invert(&f, &cfg).unwrap(), invert(&g, &cfg).unwrap(), invert(&h, &cfg).unwrap());
    for i in 0..4 {
        let lhs = ab.samples[i].value.unwrap();
        let rhs = a.samples[i].value.unwrap() * 2.0 - b.samples[i].value.unwrap() * 3.0;
        assert!((lhs - rhs).norm() < 1e-6 * rhs.norm().max(1.0), "t = {}", ab.samples[i].t);
    }
}

// ---------- integral tests ----------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn integral_verdicts_are_scale_invariant(k in prop_oneof![-50.0f64..-0.02, 0.02f64..50.0], which in 0usize..3) {
        let t = log_grid(1e-3, 1e6, 40, 0.25);
        let g = match which {
            0 => SampledSignal::from_fn(t, |t| (t + 1.0).powf(-1.5)),
            1 => SampledSignal::from_fn(t, |t| 2.0 / PI * if t == 0.0 { 1.0 } else { t.sin() / t }),
            _ => SampledSignal::from_fn(t, |t| (-t).exp()),
        }
        .unwrap();
        let (a, b) = (integral_tests(&g, 0.0), integral_tests(&g.scaled(c(k, 0.0)), 0.0));
        prop_assert_eq!(a.sr, b.sr);
        prop_assert_eq!(a.bibo, b.bibo);
        prop_assert_eq!(a.beta_exp, b.beta_exp);
    }
}
