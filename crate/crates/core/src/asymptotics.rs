//! Truncated asymptotic expansions
//! `f(s) = Σ c_ν (s - b)^κ_ν + O((s - b)^κ_max)` as `s → b` from the right.
//!
//! Exact inputs (typed in by hand, or built from exact inputs) use
//! `κ_max = ∞` to mean "the sum is the whole function". Estimated inputs
//! carry a finite `κ_max` and a relative zero threshold for cancellation.

use alloc::vec::Vec;
use core::fmt;

use crate::exponent::Exponent;
use crate::util::{abs, c, cdiv, cpow, is_finite};
use crate::C64;

/// Coefficients below this fraction of the operands' scale are treated as
/// cancelled when either operand is estimated.
pub const ESTIMATED_ZERO_REL: f64 = 1e-10;

/// Relative order kept by [`AsymExpansion::reciprocal`] when the input is an
/// exact finite sum, in multiples of the smallest exponent gap.
pub const EXACT_RECIPROCAL_GAPS: i64 = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub kappa: Exponent,
    pub coeff: C64,
}

impl Term {
    pub fn new(kappa: Exponent, coeff: C64) -> Self {
        Term { kappa, coeff }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymExpansion {
    location: C64,
    terms: Vec<Term>,
    kappa_max: Exponent,
    estimated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AsymError {
    UnsortedExponents,
    ZeroCoefficient,
    TermBeyondTruncation,
    NonFinite,
    LocationMismatch,
    EmptyExpansion,
    /// `1 + a` has no known term, so its reciprocal is undetermined.
    InsufficientTruncation,
    NotOnImaginaryAxis,
}

impl fmt::Display for AsymError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AsymError::UnsortedExponents => "exponents must be strictly increasing",
            AsymError::ZeroCoefficient => "coefficients must be non-zero",
            AsymError::TermBeyondTruncation => "term exponent exceeds the truncation order",
            AsymError::NonFinite => "non-finite coefficient or exponent",
            AsymError::LocationMismatch => "expansions are about different points",
            AsymError::EmptyExpansion => "expansion has no terms",
            AsymError::InsufficientTruncation => "insufficient truncation order",
            AsymError::NotOnImaginaryAxis => "expansion point is not on the imaginary axis",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularityClass {
    Analytic,
    /// Pole of the given order.
    Pole(u32),
    /// Leading exponent non-negative, some exponent not an integer.
    RegularBranchPoint,
    /// Leading exponent negative, some exponent not an integer.
    PolarBranchPoint,
    /// Suspected singularity at which the function turned out analytic.
    Removable,
}

impl SingularityClass {
    pub fn name(self) -> &'static str {
        match self {
            SingularityClass::Analytic => "analytic",
            SingularityClass::Pole(_) => "pole",
            SingularityClass::RegularBranchPoint => "regular-branch",
            SingularityClass::PolarBranchPoint => "polar-branch",
            SingularityClass::Removable => "removable",
        }
    }
}

/// `coeff · e^{jωt} · t^{-p}` with `p = κ + 1`, from a term `c (s - jω)^κ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeTerm {
    pub omega: f64,
    pub p: f64,
    pub coeff: C64,
    pub kappa: Exponent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeAsymptotics {
    pub terms: Vec<TimeTerm>,
    /// Some exponent is negative: the response does not decay.
    pub divergent: bool,
}

fn same_location(a: C64, b: C64) -> bool {
    abs(a - b) <= 1e-12 * (1.0 + abs(a))
}

impl AsymExpansion {
    pub fn new(location: C64, terms: Vec<Term>, kappa_max: Exponent) -> Result<Self, AsymError> {
        if !is_finite(location) || kappa_max.to_f64().is_nan() {
            return Err(AsymError::NonFinite);
        }
        for t in &terms {
            if !is_finite(t.coeff) || !t.kappa.to_f64().is_finite() {
                return Err(AsymError::NonFinite);
            }
            if t.coeff == c(0.0, 0.0) {
                return Err(AsymError::ZeroCoefficient);
            }
            if t.kappa >= kappa_max {
                return Err(AsymError::TermBeyondTruncation);
            }
        }
        for w in terms.windows(2) {
            if !(w[0].kappa < w[1].kappa) {
                return Err(AsymError::UnsortedExponents);
            }
        }
        Ok(AsymExpansion { location, terms, kappa_max, estimated: false })
    }

    /// An exact finite sum (`κ_max = ∞`).
    pub fn exact(location: C64, terms: Vec<Term>) -> Result<Self, AsymError> {
        Self::new(location, terms, Exponent::infinity())
    }

    pub fn empty(location: C64, kappa_max: Exponent) -> Self {
        AsymExpansion { location, terms: Vec::new(), kappa_max, estimated: false }
    }

    /// The constant 1 about `location`.
    pub fn one(location: C64) -> Self {
        AsymExpansion {
            location,
            terms: alloc::vec![Term::new(Exponent::ZERO, c(1.0, 0.0))],
            kappa_max: Exponent::infinity(),
            estimated: false,
        }
    }

    pub fn with_estimated(mut self, estimated: bool) -> Self {
        self.estimated = estimated;
        self
    }

    pub fn location(&self) -> C64 {
        self.location
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn kappa_max(&self) -> Exponent {
        self.kappa_max
    }

    pub fn is_estimated(&self) -> bool {
        self.estimated
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<Term> {
        self.terms.first().copied()
    }

    /// Leading exponent, or `κ_max` when no term is known.
    fn lead_order(&self) -> Exponent {
        self.terms.first().map_or(self.kappa_max, |t| t.kappa)
    }

    /// The finite sum evaluated at `s` (principal branch).
    pub fn eval_partial(&self, s: C64) -> C64 {
        let z = s - self.location;
        self.terms.iter().map(|t| t.coeff * cpow(z, t.kappa.to_f64())).sum()
    }

    pub fn truncate(&self, order: Exponent) -> Self {
        let kappa_max = self.kappa_max.min(order);
        AsymExpansion {
            location: self.location,
            terms: self.terms.iter().copied().filter(|t| t.kappa < kappa_max).collect(),
            kappa_max,
            estimated: self.estimated,
        }
    }

    /// Multiplies by `(s - b)^delta`.
    pub fn shift(&self, delta: Exponent) -> Self {
        AsymExpansion {
            location: self.location,
            terms: self.terms.iter().map(|t| Term::new(t.kappa + delta, t.coeff)).collect(),
            kappa_max: if self.kappa_max.is_infinite() { self.kappa_max } else { self.kappa_max + delta },
            estimated: self.estimated,
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        if k == c(0.0, 0.0) {
            return AsymExpansion { terms: Vec::new(), ..self.clone() };
        }
        AsymExpansion {
            terms: self.terms.iter().map(|t| Term::new(t.kappa, t.coeff * k)).collect(),
            ..self.clone()
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(c(-1.0, 0.0))
    }

    fn check_location(&self, other: &Self) -> Result<(), AsymError> {
        if same_location(self.location, other.location) {
            Ok(())
        } else {
            Err(AsymError::LocationMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AsymError> {
        self.check_location(other)?;
        let kappa_max = self.kappa_max.min(other.kappa_max);
        let estimated = self.estimated || other.estimated;
        let raw = self.terms.iter().chain(other.terms.iter()).copied().collect();
        let scale = max_coeff(&self.terms).max(max_coeff(&other.terms));
        Ok(AsymExpansion {
            location: self.location,
            terms: normalize(raw, kappa_max, estimated, scale),
            kappa_max,
            estimated,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AsymError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AsymError> {
        self.check_location(other)?;
        let kappa_max = (self.kappa_max + other.lead_order()).min(other.kappa_max + self.lead_order());
        let estimated = self.estimated || other.estimated;
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let k = a.kappa + b.kappa;
                if k < kappa_max {
                    raw.push(Term::new(k, a.coeff * b.coeff));
                }
            }
        }
        let scale = max_coeff(&self.terms) * max_coeff(&other.terms);
        Ok(AsymExpansion {
            location: self.location,
            terms: normalize(raw, kappa_max, estimated, scale),
            kappa_max,
            estimated,
        })
    }

    /// `1/a`. The dominant term is factored out and the rest inverted as a
    /// truncated geometric series. For an exact finite sum the series is
    /// cut at [`EXACT_RECIPROCAL_GAPS`] times its smallest exponent step.
    pub fn reciprocal(&self) -> Result<Self, AsymError> {
        let lead = self.leading().ok_or(AsymError::InsufficientTruncation)?;
        let (k0, c0) = (lead.kappa, lead.coeff);
        let inv_c0 = cdiv(c(1.0, 0.0), c0);
        let rest: Vec<Term> = self.terms[1..]
            .iter()
            .map(|t| Term::new(t.kappa - k0, t.coeff * inv_c0))
            .collect();
        let u_max = if self.kappa_max.is_infinite() { self.kappa_max } else { self.kappa_max - k0 };
        let u = AsymExpansion { location: self.location, terms: rest, kappa_max: u_max, estimated: self.estimated };

        let series = if u.terms.is_empty() {
            AsymExpansion { kappa_max: u_max, ..Self::one(self.location) }.with_estimated(self.estimated)
        } else {
            let d = u.terms[0].kappa;
            let order = if u_max.is_infinite() { gap_multiple(d, EXACT_RECIPROCAL_GAPS) } else { u_max };
            let w = u.neg().truncate(order);
            let n = libm::floor(order.to_f64() / d.to_f64() + 1e-9) as usize;
            let mut acc = Self::one(self.location).with_estimated(self.estimated).truncate(order);
            let mut power = Self::one(self.location);
            for _ in 0..n {
                power = power.mul(&w)?.truncate(order);
                if power.terms.is_empty() {
                    break;
                }
                acc = acc.add(&power)?;
            }
            acc.truncate(order)
        };
        Ok(series.scale(inv_c0).shift(-k0))
    }

    /// `a / (1 + a)`: the expansion of the closed-loop transfer function
    /// about the same point, given the open-loop expansion `a`.
    pub fn closed_loop_map(&self) -> Result<Self, AsymError> {
        if self.terms.is_empty() {
            return Err(AsymError::EmptyExpansion);
        }
        let one_plus = self.add(&Self::one(self.location))?;
        if one_plus.terms.is_empty() {
            return Err(AsymError::InsufficientTruncation);
        }
        self.mul(&one_plus.reciprocal()?)
    }

    pub fn classify(&self) -> Result<SingularityClass, AsymError> {
        let lead = self.leading().ok_or(AsymError::EmptyExpansion)?;
        let all_integer = self.terms.iter().all(|t| t.kappa.is_integer());
        Ok(if lead.kappa.is_negative() {
            if all_integer {
                SingularityClass::Pole(libm::round(-lead.kappa.to_f64()) as u32)
            } else {
                SingularityClass::PolarBranchPoint
            }
        } else if all_integer {
            SingularityClass::Analytic
        } else {
            SingularityClass::RegularBranchPoint
        })
    }

    /// Large-`t` behaviour of the inverse transform contributed by this
    /// point, which must lie on the imaginary axis. Terms with exponent in
    /// {0, 1, 2, ...} contribute nothing.
    pub fn time_domain_terms(&self) -> Result<TimeAsymptotics, AsymError> {
        if self.location.re.abs() > 1e-9 {
            return Err(AsymError::NotOnImaginaryAxis);
        }
        let omega = self.location.im;
        let mut terms = Vec::new();
        let mut divergent = false;
        for t in &self.terms {
            if t.kappa.is_negative() {
                divergent = true;
            }
            if t.kappa.is_nonneg_integer() {
                continue;
            }
            let k = t.kappa.to_f64();
            let g = libm::tgamma(-k);
            terms.push(TimeTerm { omega, p: k + 1.0, coeff: t.coeff / g, kappa: t.kappa });
        }
        Ok(TimeAsymptotics { terms, divergent })
    }
}

fn gap_multiple(d: Exponent, n: i64) -> Exponent {
    let mut acc = d;
    for _ in 1..n {
        acc = acc + d;
    }
    acc
}

fn max_coeff(terms: &[Term]) -> f64 {
    terms.iter().map(|t| abs(t.coeff)).fold(0.0, f64::max)
}

/// Sorts, merges equal exponents, drops cancelled and out-of-order terms.
fn normalize(mut raw: Vec<Term>, kappa_max: Exponent, estimated: bool, scale: f64) -> Vec<Term> {
    raw.sort_by(|a, b| a.kappa.partial_cmp(&b.kappa).unwrap_or(core::cmp::Ordering::Equal));
    let mut out: Vec<Term> = Vec::with_capacity(raw.len());
    for t in raw {
        if !(t.kappa < kappa_max) {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.kappa == t.kappa => last.coeff += t.coeff,
            _ => out.push(t),
        }
    }
    let threshold = if estimated { ESTIMATED_ZERO_REL * scale } else { 0.0 };
    out.retain(|t| abs(t.coeff) > threshold);
    out
}

/// Smallest exponent outside {0, 1, 2, ...} across the given expansions.
/// It fixes the slowest algebraic decay `t^{-κ*-1}` of a stable response.
pub fn kappa_star(expansions: &[AsymExpansion]) -> Option<Exponent> {
    expansions
        .iter()
        .flat_map(|e| e.terms.iter())
        .map(|t| t.kappa)
        .filter(|k| !k.is_nonneg_integer())
        .fold(None, |acc: Option<Exponent>, k| Some(acc.map_or(k, |a| a.min(k))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(kappa: Exponent, re: f64) -> Term {
        Term::new(kappa, c(re, 0.0))
    }

    fn half(n: i64) -> Exponent {
        Exponent::ratio(n, 2)
    }

    #[test]
    fn constructor_enforces_invariants() {
        let z = c(0.0, 0.0);
        assert_eq!(
            AsymExpansion::exact(z, alloc::vec![t(half(1), 1.0), t(half(1), 2.0)]),
            Err(AsymError::UnsortedExponents)
        );
        assert_eq!(
            AsymExpansion::exact(z, alloc::vec![Term::new(half(1), c(0.0, 0.0))]),
            Err(AsymError::ZeroCoefficient)
        );
        assert_eq!(
            AsymExpansion::new(z, alloc::vec![t(half(3), 1.0)], Exponent::ONE),
            Err(AsymError::TermBeyondTruncation)
        );
    }

    #[test]
    fn reciprocal_of_one_plus_sqrt() {
        let a = AsymExpansion::exact(c(0.0, 0.0), alloc::vec![t(Exponent::ZERO, 1.0), t(half(1), 1.0)]).unwrap();
        let r = a.reciprocal().unwrap();
        let want = [1.0, -1.0, 1.0, -1.0];
        assert_eq!(r.kappa_max(), Exponent::int(2));
        assert_eq!(r.terms().len(), 4);
        for (i, term) in r.terms().iter().enumerate() {
            assert_eq!(term.kappa, half(i as i64));
            assert!((term.coeff - c(want[i], 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn closed_loop_polar_branch_point() {
        // a = s^{-3/2} - s^{-1/2} + s^{1/2}, truncated at 3/2.
        let a = AsymExpansion::new(
            c(0.0, 0.0),
            alloc::vec![t(half(-3), 1.0), t(half(-1), -1.0), t(half(1), 1.0)],
            half(3),
        )
        .unwrap();
        let h = a.closed_loop_map().unwrap();
        assert_eq!(h.leading().unwrap().kappa, Exponent::ZERO);
        assert!((h.leading().unwrap().coeff - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(h.kappa_max(), Exponent::int(3));
        assert_eq!(h.classify().unwrap(), SingularityClass::RegularBranchPoint);
        let k1 = h.terms()[1];
        assert_eq!(k1.kappa, half(3));
        assert!((k1.coeff - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn closed_loop_minus_one_leading_term() {
        // a = -1 + s^{1/2}: 1 + a = s^{1/2}, so a/(1+a) = -s^{-1/2} + 1.
        let a = AsymExpansion::exact(c(0.0, 0.0), alloc::vec![t(Exponent::ZERO, -1.0), t(half(1), 1.0)]).unwrap();
        let h = a.closed_loop_map().unwrap();
        assert_eq!(h.leading().unwrap().kappa, half(-1));
        assert!((h.leading().unwrap().coeff - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(h.classify().unwrap(), SingularityClass::PolarBranchPoint);

        let lone = AsymExpansion::new(c(0.0, 0.0), alloc::vec![t(Exponent::ZERO, -1.0)], half(1)).unwrap();
        assert_eq!(lone.closed_loop_map(), Err(AsymError::InsufficientTruncation));
    }

    #[test]
    fn classify_cases() {
        let z = c(0.0, 0.0);
        let ex = |v: alloc::vec::Vec<Term>| AsymExpansion::exact(z, v).unwrap().classify().unwrap();
        assert_eq!(ex(alloc::vec![t(Exponent::int(-2), 1.0), t(Exponent::ZERO, 1.0)]), SingularityClass::Pole(2));
        assert_eq!(ex(alloc::vec![t(Exponent::int(-1), 1.0), t(half(1), 1.0)]), SingularityClass::PolarBranchPoint);
        assert_eq!(ex(alloc::vec![t(Exponent::ZERO, 1.0), t(half(1), 1.0)]), SingularityClass::RegularBranchPoint);
        assert_eq!(ex(alloc::vec![t(Exponent::ZERO, 1.0), t(Exponent::ONE, 1.0)]), SingularityClass::Analytic);
    }

    #[test]
    fn time_domain_tail_of_sqrt() {
        // sqrt(s) at 0 → -t^{-3/2} / (2 sqrt(pi)).
        let a = AsymExpansion::exact(c(0.0, 0.0), alloc::vec![t(Exponent::ZERO, 1.0), t(half(1), 1.0)]).unwrap();
        let td = a.time_domain_terms().unwrap();
        assert!(!td.divergent);
        assert_eq!(td.terms.len(), 1);
        let want = -0.5 / libm::sqrt(core::f64::consts::PI);
        assert!((td.terms[0].coeff.re - want).abs() < 1e-14);
        assert!((td.terms[0].p - 1.5).abs() < 1e-15);

        let off = AsymExpansion::exact(c(0.5, 1.0), alloc::vec![t(half(1), 1.0)]).unwrap();
        assert_eq!(off.time_domain_terms(), Err(AsymError::NotOnImaginaryAxis));
    }

    #[test]
    fn estimated_cancellation_is_relative() {
        let z = c(0.0, 0.0);
        let a = AsymExpansion::new(z, alloc::vec![t(Exponent::ZERO, -1.0 + 1e-13), t(half(1), 2.0)], Exponent::ONE)
            .unwrap()
            .with_estimated(true);
        let s = a.add(&AsymExpansion::one(z)).unwrap();
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.leading().unwrap().kappa, half(1));
    }

    #[test]
    fn kappa_star_skips_naturals() {
        let z = c(0.0, 0.0);
        let a = AsymExpansion::exact(z, alloc::vec![t(Exponent::ZERO, 1.0), t(Exponent::ONE, 1.0), t(half(3), 1.0)]).unwrap();
        let b = AsymExpansion::exact(c(0.0, 2.0), alloc::vec![t(half(5), 1.0)]).unwrap();
        assert_eq!(kappa_star(&[a, b]), Some(half(3)));
        assert_eq!(kappa_star(&[]), None);
    }
}
