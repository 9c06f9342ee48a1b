#![allow(dead_code)]

pub mod gen;

use bibo_core::analysis::Declaration;
use bibo_core::expr::parse;
use bibo_core::{AsymExpansion, Exponent, Term, TransferExpr, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn term(num: i64, den: i64, re: f64, im: f64) -> Term {
    Term::new(Exponent::ratio(num, den), c(re, im))
}

pub fn expansion(b: C64, terms: Vec<Term>, kmax: (i64, i64)) -> AsymExpansion {
    AsymExpansion::new(b, terms, Exponent::ratio(kmax.0, kmax.1)).unwrap()
}

/// `K / (s^{3/2} (s + 1))` with its expansion at the origin.
pub fn fractional(k: f64) -> (TransferExpr, Vec<Declaration>) {
    let f = parse(&format!("{:?}/(s^1.5*(s+1))", k)).unwrap();
    let e = expansion(
        c(0.0, 0.0),
        vec![term(-3, 2, k, 0.0), term(-1, 2, -k, 0.0), term(1, 2, k, 0.0)],
        (3, 2),
    );
    (f, vec![Declaration::Expansion(e)])
}

pub struct Case {
    pub name: &'static str,
    pub f: TransferExpr,
    pub decls: Vec<Declaration>,
    pub open_stable: bool,
    pub closed_stable: bool,
    pub witness: Option<TransferExpr>,
}

fn case(name: &'static str, src: &str, decls: Vec<Declaration>, open_stable: bool, closed_stable: bool) -> Case {
    Case { name, f: parse(src).unwrap(), decls, open_stable, closed_stable, witness: None }
}

fn auto(b: C64, n: usize) -> Declaration {
    Declaration::Auto { location: b, n_terms: n }
}

/// Regression corpus. Closed-loop verdicts are known from the roots of the
/// characteristic equation worked by hand.
pub fn corpus() -> Vec<Case> {
    let mut out = Vec::new();
    for (name, k, stable) in [
        ("fractional_k0.5", 0.5, true),
        ("fractional_k1", 1.0, true),
        ("fractional_k_sqrt2", std::f64::consts::SQRT_2, false),
        ("fractional_k2", 2.0, false),
        ("fractional_k3", 3.0, false),
    ] {
        let (f, decls) = fractional(k);
        out.push(Case { name, f, decls, open_stable: false, closed_stable: stable, witness: None });
    }
    out.push(case("first_order", "1/(s+1)", vec![], true, true));
    out.push(case("second_order", "2/(s^2+2*s+2)", vec![], true, true));
    out.push(case("nonminimum_phase", "(s-1)/((s+1)*(s+2))", vec![], true, true));
    // 1 + F = (s + 2)/(s - 1)
    out.push(case("unstable_open_loop", "3/(s-1)", vec![], false, true));
    // s^3 + 3s^2 + 3s + 9: Routh row 3 - 3 = 0 is marginal, so use 9 -> 8 + 1.
    out.push(case("third_order_high_gain", "10/(s+1)^3", vec![], true, false));
    out.push(case(
        "integrator",
        "1/s",
        vec![Declaration::Expansion(AsymExpansion::exact(c(0.0, 0.0), vec![term(-1, 1, 1.0, 0.0)]).unwrap())],
        false,
        true,
    ));
    // sqrt(s)(s+1) + 1 = 0 has z^3 + z + 1 = 0 with z = sqrt(s); the roots
    // with Re z > 0 square into the left half-plane.
    out.push(case(
        "polar_half",
        "1/(s^0.5*(s+1))",
        vec![Declaration::Expansion(expansion(
            c(0.0, 0.0),
            vec![term(-1, 2, 1.0, 0.0), term(1, 2, -1.0, 0.0), term(3, 2, 1.0, 0.0)],
            (5, 2),
        ))],
        false,
        true,
    ));
    out.push(case(
        "regular_half",
        "1/(1+s^0.5)^2",
        vec![Declaration::Expansion(expansion(
            c(0.0, 0.0),
            vec![term(0, 1, 1.0, 0.0), term(1, 2, -2.0, 0.0), term(1, 1, 3.0, 0.0), term(3, 2, -4.0, 0.0)],
            (2, 1),
        ))],
        true,
        true,
    ));
    // Poles at +-j; 1 + F = (s^2 + 2)/(s^2 + 1) puts closed-loop poles at +-j sqrt 2.
    out.push(case("axis_pair", "1/(s^2+1)", vec![auto(c(0.0, -1.0), 2), auto(c(0.0, 1.0), 2)], false, false));
    out.push(case("auto_regular", "1/(s+1)^2 + 0.5*s^0.5/(s+1)^3", vec![auto(c(0.0, 0.0), 3)], true, true));
    out.push(case(
        "heat",
        "(exp(0.5*s^0.5) - exp(-0.5*s^0.5)) / (exp(s^0.5) - exp(-(s^0.5)))",
        vec![auto(c(0.0, 0.0), 2)],
        true,
        true,
    ));
    out.push(case("dead_time", "0.5*exp(-s)/(s+1)", vec![], true, true));
    out
}
