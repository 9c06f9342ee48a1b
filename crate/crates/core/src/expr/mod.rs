//! Transfer-function expressions in the Laplace variable `s`.
//!
//! Expressions are trees built from complex constants, `s`, sums, products,
//! quotients, real powers and the exponential. Non-integer powers are
//! evaluated on the principal branch, with the cut along the negative real
//! axis of the base.

mod derivative;
mod parse;
mod print;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::util::{c, cdiv, cpow, is_finite};
use crate::C64;

pub use parse::{parse, parse_with, ParseError, ParseErrorKind};

#[derive(Clone, Debug, PartialEq)]
pub struct TransferExpr {
    node: Node,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(C64),
    Var,
    Sum(Vec<TransferExpr>),
    Product(Vec<TransferExpr>),
    Quotient(Box<TransferExpr>, Box<TransferExpr>),
    Power(Box<TransferExpr>, f64),
    Exp(Box<TransferExpr>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BuildError {
    NonFiniteConstant,
    NonFiniteExponent,
    LiteralZeroDenominator,
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::NonFiniteConstant => f.write_str("non-finite constant"),
            BuildError::NonFiniteExponent => f.write_str("non-finite exponent"),
            BuildError::LiteralZeroDenominator => f.write_str("denominator is the literal 0"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EvalError {
    /// Division by an exact zero, or a negative power of zero.
    PoleHit,
    /// Overflow or an indeterminate form; the offending value is kept so
    /// callers can tell `inf` from `NaN`.
    NonFinite(C64),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::PoleHit => f.write_str("pole hit"),
            EvalError::NonFinite(v) => write!(f, "non-finite value ({}, {})", v.re, v.im),
        }
    }
}

impl TransferExpr {
    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn var() -> Self {
        TransferExpr { node: Node::Var }
    }

    pub fn constant(value: C64) -> Result<Self, BuildError> {
        if !is_finite(value) {
            return Err(BuildError::NonFiniteConstant);
        }
        Ok(TransferExpr { node: Node::Const(value) })
    }

    /// Panics on non-finite input; meant for literals in code.
    pub fn real(x: f64) -> Self {
        Self::constant(c(x, 0.0)).expect("finite real constant")
    }

    pub fn sum(mut terms: Vec<TransferExpr>) -> Self {
        match terms.len() {
            0 => Self::real(0.0),
            1 => terms.pop().unwrap(),
            _ => TransferExpr { node: Node::Sum(terms) },
        }
    }

    pub fn product(mut factors: Vec<TransferExpr>) -> Self {
        match factors.len() {
            0 => Self::real(1.0),
            1 => factors.pop().unwrap(),
            _ => TransferExpr { node: Node::Product(factors) },
        }
    }

    pub fn quotient(num: TransferExpr, den: TransferExpr) -> Result<Self, BuildError> {
        if den.is_zero_literal() {
            return Err(BuildError::LiteralZeroDenominator);
        }
        Ok(TransferExpr { node: Node::Quotient(Box::new(num), Box::new(den)) })
    }

    pub fn power(base: TransferExpr, exponent: f64) -> Result<Self, BuildError> {
        if !exponent.is_finite() {
            return Err(BuildError::NonFiniteExponent);
        }
        Ok(TransferExpr { node: Node::Power(Box::new(base), exponent) })
    }

    pub fn exp(arg: TransferExpr) -> Self {
        TransferExpr { node: Node::Exp(Box::new(arg)) }
    }

    /// `-self`, folded when `self` is a constant.
    pub fn negate(self) -> Self {
        match self.node {
            Node::Const(v) => TransferExpr { node: Node::Const(-v) },
            _ => Self::product(alloc::vec![Self::real(-1.0), self]),
        }
    }

    /// `self + other` as a two-term sum.
    pub fn plus(self, other: TransferExpr) -> Self {
        Self::sum(alloc::vec![self, other])
    }

    pub fn times(self, other: TransferExpr) -> Self {
        Self::product(alloc::vec![self, other])
    }

    pub fn as_const(&self) -> Option<C64> {
        match self.node {
            Node::Const(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        self.as_const() == Some(c(0.0, 0.0))
    }

    pub fn is_one_literal(&self) -> bool {
        self.as_const() == Some(c(1.0, 0.0))
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match &self.node {
            Node::Const(_) | Node::Var => 0,
            Node::Sum(v) | Node::Product(v) => v.iter().map(|e| e.size()).sum(),
            Node::Quotient(a, b) => a.size() + b.size(),
            Node::Power(a, _) | Node::Exp(a) => a.size(),
        }
    }

    pub fn eval(&self, s: C64) -> Result<C64, EvalError> {
        let v = match &self.node {
            Node::Const(v) => *v,
            Node::Var => s,
            Node::Sum(terms) => {
                let mut acc = terms[0].eval(s)?;
                for t in &terms[1..] {
                    acc += t.eval(s)?;
                }
                acc
            }
            Node::Product(factors) => {
                let mut acc = factors[0].eval(s)?;
                for f in &factors[1..] {
                    acc *= f.eval(s)?;
                }
                acc
            }
            Node::Quotient(num, den) => {
                let d = den.eval(s)?;
                if d.re == 0.0 && d.im == 0.0 {
                    return Err(EvalError::PoleHit);
                }
                cdiv(num.eval(s)?, d)
            }
            Node::Power(base, k) => {
                let z = base.eval(s)?;
                if z.re == 0.0 && z.im == 0.0 {
                    if *k > 0.0 {
                        c(0.0, 0.0)
                    } else if *k == 0.0 {
                        c(1.0, 0.0)
                    } else {
                        return Err(EvalError::PoleHit);
                    }
                } else {
                    cpow(z, *k)
                }
            }
            Node::Exp(arg) => arg.eval(s)?.exp(),
        };
        if is_finite(v) {
            Ok(v)
        } else {
            Err(EvalError::NonFinite(v))
        }
    }

    /// Splits `self` into `(numerator, denominator)` with
    /// `self = numerator / denominator`, neither containing a quotient or a
    /// negative power at top level. Negative powers move to the denominator
    /// as positive powers, so both parts are finite wherever the bases are
    /// finite and non-zero.
    pub fn split_fraction(&self) -> (TransferExpr, TransferExpr) {
        match &self.node {
            Node::Quotient(a, b) => {
                let (an, ad) = a.split_fraction();
                let (bn, bd) = b.split_fraction();
                (mul_simplified(an, bd), mul_simplified(ad, bn))
            }
            Node::Product(factors) => {
                let mut nums = Vec::new();
                let mut dens = Vec::new();
                for f in factors {
                    let (n, d) = f.split_fraction();
                    if !n.is_one_literal() {
                        nums.push(n);
                    }
                    if !d.is_one_literal() {
                        dens.push(d);
                    }
                }
                (Self::product(nums), Self::product(dens))
            }
            Node::Power(base, k) => {
                let (n, d) = base.split_fraction();
                if *k < 0.0 {
                    (pow_simplified(d, -*k), pow_simplified(n, -*k))
                } else if d.is_one_literal() {
                    (self.clone(), d)
                } else {
                    (pow_simplified(n, *k), pow_simplified(d, *k))
                }
            }
            Node::Sum(terms) => {
                let parts: Vec<_> = terms.iter().map(|t| t.split_fraction()).collect();
                if parts.iter().all(|(_, d)| d.is_one_literal()) {
                    return (self.clone(), Self::real(1.0));
                }
                let dens: Vec<TransferExpr> = parts.iter().map(|(_, d)| d.clone()).collect();
                let mut num_terms = Vec::new();
                for (i, (n, _)) in parts.iter().enumerate() {
                    let mut fs = alloc::vec![n.clone()];
                    for (j, d) in dens.iter().enumerate() {
                        if j != i && !d.is_one_literal() {
                            fs.push(d.clone());
                        }
                    }
                    num_terms.push(Self::product(fs));
                }
                let den = Self::product(dens.into_iter().filter(|d| !d.is_one_literal()).collect());
                (Self::sum(num_terms), den)
            }
            _ => (self.clone(), Self::real(1.0)),
        }
    }
}

fn mul_simplified(a: TransferExpr, b: TransferExpr) -> TransferExpr {
    if a.is_one_literal() {
        b
    } else if b.is_one_literal() {
        a
    } else {
        a.times(b)
    }
}

fn pow_simplified(a: TransferExpr, k: f64) -> TransferExpr {
    if a.is_one_literal() || k == 1.0 {
        a
    } else {
        TransferExpr::power(a, k).expect("finite exponent")
    }
}

impl fmt::Display for TransferExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(f, self)
    }
}

impl core::str::FromStr for TransferExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn principal_branch_sqrt_conjugate_pair() {
        let e = parse("s^0.5").unwrap();
        let up = e.eval(c(-1.0, 1e-300)).unwrap();
        let down = e.eval(c(-1.0, -1e-300)).unwrap();
        assert!(close(up, c(0.0, 1.0), 1e-12));
        assert!(close(down, c(0.0, -1.0), 1e-12));
    }

    #[test]
    fn powers_of_zero() {
        assert_eq!(parse("s^1.5").unwrap().eval(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(parse("s^0").unwrap().eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(parse("s^(-0.5)").unwrap().eval(c(0.0, 0.0)), Err(EvalError::PoleHit));
        assert_eq!(parse("1/s").unwrap().eval(c(0.0, 0.0)), Err(EvalError::PoleHit));
    }

    #[test]
    fn overflow_reports_nonfinite() {
        match parse("exp(s)").unwrap().eval(c(1000.0, 0.0)) {
            Err(EvalError::NonFinite(v)) => assert!(v.re.is_infinite()),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn literal_zero_denominator_rejected() {
        assert!(TransferExpr::quotient(TransferExpr::var(), TransferExpr::real(0.0)).is_err());
    }

    #[test]
    fn split_fraction_reassembles() {
        let cases = [
            "1/(s^1.5*(s+1))",
            "(s^0.5 - 1)/((s+1)*(s^0.5+1))",
            "1/(s+1) + 2/(s-3)",
            "s^(-0.5)*(s+2)",
            "(exp(0.5*s^0.5) - exp(-0.5*s^0.5))/(exp(s^0.5) - exp(-(s^0.5)))",
        ];
        for src in cases {
            let e = parse(src).unwrap();
            let (n, d) = e.split_fraction();
            for z in [c(0.7, 0.3), c(2.0, -1.5), c(0.1, 4.0)] {
                let lhs = e.eval(z).unwrap();
                let rhs = n.eval(z).unwrap() / d.eval(z).unwrap();
                assert!(close(lhs, rhs, 1e-12), "{}: {} vs {}", src, lhs, rhs);
            }
        }
    }

    #[test]
    fn split_fraction_moves_negative_powers_down() {
        let (n, d) = parse("s^(-1.5)").unwrap().split_fraction();
        assert!(n.is_one_literal());
        assert_eq!(d, parse("s^1.5").unwrap());
    }
}
