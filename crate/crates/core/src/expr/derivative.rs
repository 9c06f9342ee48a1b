use alloc::vec::Vec;

use super::{Node, TransferExpr};

impl TransferExpr {
    /// Symbolic `d/ds`, with zero terms and unit factors dropped.
    pub fn derivative(&self) -> TransferExpr {
        match self.node() {
            Node::Const(_) => TransferExpr::real(0.0),
            Node::Var => TransferExpr::real(1.0),
            Node::Sum(terms) => {
                let ds: Vec<_> = terms
                    .iter()
                    .map(|t| t.derivative())
                    .filter(|d| !d.is_zero_literal())
                    .collect();
                TransferExpr::sum(ds)
            }
            Node::Product(factors) => {
                let mut terms = Vec::new();
                for i in 0..factors.len() {
                    let d = factors[i].derivative();
                    if d.is_zero_literal() {
                        continue;
                    }
                    let mut fs = Vec::with_capacity(factors.len());
                    for (k, f) in factors.iter().enumerate() {
                        if k == i {
                            if !d.is_one_literal() {
                                fs.push(d.clone());
                            }
                        } else {
                            fs.push(f.clone());
                        }
                    }
                    terms.push(TransferExpr::product(fs));
                }
                TransferExpr::sum(terms)
            }
            Node::Quotient(u, v) => {
                let du = u.derivative();
                let dv = v.derivative();
                if dv.is_zero_literal() {
                    if du.is_zero_literal() {
                        return TransferExpr::real(0.0);
                    }
                    return TransferExpr::quotient(du, (**v).clone()).expect("nonzero denominator");
                }
                let mut num = Vec::new();
                if !du.is_zero_literal() {
                    num.push(mul(du, (**v).clone()));
                }
                num.push(mul((**u).clone(), dv).negate());
                let den = TransferExpr::power((**v).clone(), 2.0).expect("finite exponent");
                TransferExpr::quotient(TransferExpr::sum(num), den).expect("nonzero denominator")
            }
            Node::Power(u, k) => {
                let du = u.derivative();
                if du.is_zero_literal() || *k == 0.0 {
                    return TransferExpr::real(0.0);
                }
                let lowered = if *k == 1.0 {
                    TransferExpr::real(1.0)
                } else {
                    TransferExpr::power((**u).clone(), k - 1.0).expect("finite exponent")
                };
                let mut fs = alloc::vec![TransferExpr::real(*k)];
                if !lowered.is_one_literal() {
                    fs.push(lowered);
                }
                if !du.is_one_literal() {
                    fs.push(du);
                }
                if fs.len() > 1 && fs[0].is_one_literal() {
                    fs.remove(0);
                }
                TransferExpr::product(fs)
            }
            Node::Exp(u) => {
                let du = u.derivative();
                if du.is_zero_literal() {
                    return TransferExpr::real(0.0);
                }
                mul(self.clone(), du)
            }
        }
    }
}

fn mul(a: TransferExpr, b: TransferExpr) -> TransferExpr {
    if a.is_one_literal() {
        b
    } else if b.is_one_literal() {
        a
    } else {
        a.times(b)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use crate::util::c;

    #[test]
    fn matches_central_difference() {
        for src in [
            "1/(s^1.5*(s+1))",
            "exp(-(s^0.5))/(s+2)",
            "(s^0.5 - 1)/((s+1)*(s^0.5+1))",
            "s^3 - 2*s + 7",
        ] {
            let e = parse(src).unwrap();
            let d = e.derivative();
            for z in [c(1.3, 0.4), c(0.5, -2.0)] {
                let h = 1e-5;
                let fd = (e.eval(z + c(h, 0.0)).unwrap() - e.eval(z - c(h, 0.0)).unwrap()) / (2.0 * h);
                let sym = d.eval(z).unwrap();
                assert!((fd - sym).norm() < 1e-7 * (1.0 + sym.norm()), "{}: {} vs {}", src, fd, sym);
            }
        }
    }

    #[test]
    fn constants_vanish() {
        assert!(parse("3 + 2*j").unwrap().derivative().is_zero_literal());
        assert!(parse("s").unwrap().derivative().is_one_literal());
    }
}
