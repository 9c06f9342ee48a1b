#![allow(dead_code)]

use std::f64::consts::PI;

use bibo_core::{AsymExpansion, Exponent, Term, TransferExpr, C64};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::c;

// ---------- expansion algebra ----------

pub fn arb_expansion() -> impl Strategy<Value = AsymExpansion> {
    (1i64..=3, prop::collection::btree_map(-4i64..=6, (-2.0f64..2.0, -2.0f64..2.0), 1..5), 1i64..=4).prop_filter_map(
        "coefficients must be nonzero",
        |(den, raw, extra)| {
            let mut terms = Vec::new();
            for (num, (re, im)) in &raw {
                if re.abs() + im.abs() < 1e-3 {
                    return None;
                }
                terms.push(Term::new(Exponent::ratio(*num, den), c(*re, *im)));
            }
            let top = raw.keys().max().unwrap() + extra;
            AsymExpansion::new(c(0.0, 0.0), terms, Exponent::ratio(top, den)).ok()
        },
    )
}

/// Same known terms below the smaller truncation order.
pub fn assert_close(a: &AsymExpansion, b: &AsymExpansion) -> Result<(), TestCaseError> {
    assert_close_at(a, b, 1.0)
}

/// `scale` bounds the size of intermediate coefficients that cancelled.
pub fn assert_close_at(a: &AsymExpansion, b: &AsymExpansion, scale: f64) -> Result<(), TestCaseError> {
    let order = a.kappa_max().min(b.kappa_max());
    let (a, b) = (a.truncate(order), b.truncate(order));
    let scale = a.terms().iter().chain(b.terms()).map(|t| t.coeff.norm()).fold(scale, f64::max);
    let mut i = 0;
    let mut j = 0;
    while i < a.terms().len() || j < b.terms().len() {
        let (ta, tb) = (a.terms().get(i), b.terms().get(j));
        match (ta, tb) {
            (Some(x), Some(y)) if x.kappa == y.kappa => {
                prop_assert!((x.coeff - y.coeff).norm() < 1e-9 * scale, "{:?} vs {:?}", x, y);
                i += 1;
                j += 1;
            }
            (Some(x), y) if y.is_none_or(|y| x.kappa < y.kappa) => {
                prop_assert!(x.coeff.norm() < 1e-9 * scale, "unmatched {:?}", x);
                i += 1;
            }
            (_, Some(y)) => {
                prop_assert!(y.coeff.norm() < 1e-9 * scale, "unmatched {:?}", y);
                j += 1;
            }
            _ => unreachable!(),
        }
    }
    Ok(())
}

pub fn check_ring_laws(a: &AsymExpansion, b: &AsymExpansion, d: &AsymExpansion) -> Result<(), TestCaseError> {
    assert_close(&a.add(b).unwrap(), &b.add(a).unwrap())?;
    assert_close(&a.add(b).unwrap().add(d).unwrap(), &a.add(&b.add(d).unwrap()).unwrap())?;
    assert_close(&a.mul(b).unwrap(), &b.mul(a).unwrap())?;
    let lhs = a.mul(&b.add(d).unwrap()).unwrap();
    let rhs = a.mul(b).unwrap().add(&a.mul(d).unwrap()).unwrap();
    assert_close(&lhs, &rhs)?;
    Ok(())
}

// ---------- expressions ----------

#[derive(Clone, Debug)]
pub enum Shape {
    Var,
    Const(f64, f64),
    Shifted(f64, f64),
    Sum(Box<Shape>, Box<Shape>),
    Prod(Box<Shape>, Box<Shape>),
    Quot(Box<Shape>, Box<Shape>),
    IntPow(Box<Shape>, i32),
    Exp(Box<Shape>),
}

pub fn arb_shape() -> impl Strategy<Value = Shape> {
    let leaf = prop_oneof![
        Just(Shape::Var),
        (-3.0f64..3.0, -1.0f64..1.0).prop_map(|(a, b)| Shape::Const(a, b)),
        // (s + a)^κ with a ≥ 0 keeps the base in the right half-plane.
        (0.0f64..2.0, -2.5f64..2.5).prop_map(|(a, k)| Shape::Shifted(a, k)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Sum(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Prod(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Quot(Box::new(a), Box::new(b))),
            (inner.clone(), -3i32..=3).prop_map(|(a, k)| Shape::IntPow(Box::new(a), k)),
            inner.prop_map(|a| Shape::Exp(Box::new(a))),
        ]
    })
}

pub fn build(sh: &Shape) -> Option<TransferExpr> {
    Some(match sh {
        Shape::Var => TransferExpr::var(),
        Shape::Const(a, b) => TransferExpr::constant(c(*a, *b)).ok()?,
        Shape::Shifted(a, k) => TransferExpr::power(TransferExpr::var().plus(TransferExpr::real(*a)), *k).ok()?,
        Shape::Sum(a, b) => build(a)?.plus(build(b)?),
        Shape::Prod(a, b) => build(a)?.times(build(b)?),
        Shape::Quot(a, b) => TransferExpr::quotient(build(a)?, build(b)?).ok()?,
        Shape::IntPow(a, k) => TransferExpr::power(build(a)?, *k as f64).ok()?,
        Shape::Exp(a) => TransferExpr::exp(build(a)?),
    })
}

pub fn has_complex_const(sh: &Shape) -> bool {
    match sh {
        Shape::Const(_, b) => *b != 0.0,
        Shape::Var | Shape::Shifted(..) => false,
        Shape::Sum(a, b) | Shape::Prod(a, b) | Shape::Quot(a, b) => has_complex_const(a) || has_complex_const(b),
        Shape::IntPow(a, _) | Shape::Exp(a) => has_complex_const(a),
    }
}

pub fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Symbolic derivative against a central difference with step
/// `1e-6 (1 + |s|)`. `Ok(false)` when the point is not usable.
pub fn check_derivative(sh: &Shape, s: C64) -> Result<bool, TestCaseError> {
    let f = match build(sh) { Some(f) => f, None => return Ok(false) };
    let h = 1e-6 * (1.0 + s.norm());
    let (fp, fm, f0) = match (f.eval(s + c(h, 0.0)), f.eval(s - c(h, 0.0)), f.eval(s)) {
        (Ok(a), Ok(b), Ok(v)) if finite(a) && finite(b) && v.norm() < 1e8 => (a, b, v),
        _ => return Ok(false),
    };
    let d = match f.derivative().eval(s) { Ok(d) if finite(d) => d, _ => return Ok(false) };
    let fd = (fp - fm) / (2.0 * h);
    // Rounding in the difference quotient is of order ulp(|f|)/h.
    let floor = 1e-8 * f0.norm() / (1.0 + s.norm());
    prop_assert!((d - fd).norm() <= 1e-6 * d.norm() + floor, "{} at {}: {} vs {}", f, s, d, fd);
    Ok(true)
}

// ---------- inverse Laplace transform ----------

pub type Exact = Box<dyn Fn(f64) -> f64>;

pub fn known_pairs() -> Vec<(&'static str, Exact)> {
    vec![
        ("1/(s+1)", Box::new(|t: f64| (-t).exp())),
        ("1/(s*(s+1))", Box::new(|t: f64| 1.0 - (-t).exp())),
        ("s/(s^2+1)", Box::new(|t: f64| t.cos())),
        ("1/(s+0.2)^2", Box::new(|t: f64| t * (-0.2 * t).exp())),
        ("1/((s+0.5)^2+1)", Box::new(|t: f64| (-0.5 * t).exp() * t.sin())),
        ("1/s^0.5", Box::new(|t: f64| 1.0 / (PI * t).sqrt())),
        ("1/s^1.5", Box::new(|t: f64| 2.0 * (t / PI).sqrt())),
        ("1/(s+1)^0.5", Box::new(|t: f64| (-t).exp() / (PI * t).sqrt())),
    ]
}

