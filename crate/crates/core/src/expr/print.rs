//! Canonical text form. Parsing the output reproduces the same tree.

use core::fmt::{self, Write};

use super::{Node, TransferExpr};
use crate::C64;

pub(super) fn write_expr(f: &mut fmt::Formatter<'_>, e: &TransferExpr) -> fmt::Result {
    match e.node() {
        Node::Const(v) => write_const(f, *v),
        Node::Var => f.write_char('s'),
        Node::Sum(terms) => {
            for (i, t) in terms.iter().enumerate() {
                if i > 0 {
                    f.write_str(" + ")?;
                }
                if matches!(t.node(), Node::Sum(_)) {
                    paren(f, t)?;
                } else {
                    write_expr(f, t)?;
                }
            }
            Ok(())
        }
        Node::Product(factors) => {
            for (i, t) in factors.iter().enumerate() {
                if i > 0 {
                    f.write_char('*')?;
                }
                if is_compound(t) {
                    paren(f, t)?;
                } else {
                    write_expr(f, t)?;
                }
            }
            Ok(())
        }
        Node::Quotient(num, den) => {
            if is_compound(num) {
                paren(f, num)?;
            } else {
                write_expr(f, num)?;
            }
            f.write_char('/')?;
            if is_compound(den) {
                paren(f, den)
            } else {
                write_expr(f, den)
            }
        }
        Node::Power(base, k) => {
            let atomic = match base.node() {
                Node::Var => true,
                Node::Const(v) => v.im == 0.0 && v.re >= 0.0 && !v.re.is_sign_negative(),
                _ => false,
            };
            if atomic {
                write_expr(f, base)?;
            } else {
                paren(f, base)?;
            }
            if *k < 0.0 || (*k == 0.0 && k.is_sign_negative()) {
                write!(f, "^({})", k)
            } else {
                write!(f, "^{}", k)
            }
        }
        Node::Exp(arg) => {
            f.write_str("exp(")?;
            write_expr(f, arg)?;
            f.write_char(')')
        }
    }
}

fn is_compound(e: &TransferExpr) -> bool {
    matches!(e.node(), Node::Sum(_) | Node::Product(_) | Node::Quotient(..))
}

fn paren(f: &mut fmt::Formatter<'_>, e: &TransferExpr) -> fmt::Result {
    f.write_char('(')?;
    write_expr(f, e)?;
    f.write_char(')')
}

fn write_const(f: &mut fmt::Formatter<'_>, v: C64) -> fmt::Result {
    if v.im == 0.0 {
        if v.re.is_sign_negative() {
            write!(f, "({})", v.re)
        } else {
            write!(f, "{}", v.re)
        }
    } else if v.im.is_sign_negative() {
        write!(f, "({}-{}*j)", v.re, -v.im)
    } else {
        write!(f, "({}+{}*j)", v.re, v.im)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use alloc::string::ToString;

    #[test]
    fn canonical_forms() {
        let cases = [
            ("1/(s^1.5*(s+1))", "1/(s^1.5*(s + 1))"),
            ("s - 1", "s + (-1)"),
            ("-s", "(-1)*s"),
            ("s^-0.5", "s^(-0.5)"),
            ("(s+1)^2", "(s + 1)^2"),
            ("exp(-(s^0.5))", "exp((-1)*s^0.5)"),
            ("1 - 2*j", "(1-2*j)"),
            ("a*b/c", "(2*s)/3"),
        ];
        let mut k = alloc::collections::BTreeMap::new();
        k.insert("a".to_string(), crate::util::c(2.0, 0.0));
        k.insert("b".to_string(), crate::util::c(0.0, 0.0));
        k.insert("c".to_string(), crate::util::c(3.0, 0.0));
        for (src, want) in &cases[..7] {
            assert_eq!(parse(src).unwrap().to_string(), *want);
        }
        let e = super::super::parse_with("a*s/c", &k).unwrap();
        assert_eq!(e.to_string(), cases[7].1);
    }

    #[test]
    fn print_parse_round_trip() {
        for src in [
            "1/(s^1.5*(s+1))",
            "(exp(0.5*s^0.5) - exp(-0.5*s^0.5))/(exp(s^0.5) - exp(-(s^0.5)))",
            "a*b/c*d/e".replace(['a', 'b', 'c', 'd', 'e'], "s").as_str(),
            "((s+1)*(s+2))*(s+3)",
            "(s^0.5 - 1)/((s+1)*(s^0.5+1)) + 0.1*j",
            "(-2)^0.5*s",
            "s^(1/3)",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{} -> {}", src, printed);
        }
    }
}
