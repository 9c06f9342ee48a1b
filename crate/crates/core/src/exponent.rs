//! Real exponents of comparison functions `(s - b)^κ`.
//!
//! Exponents that are rational are kept exact so that series algebra does
//! not produce near-duplicate exponents; anything else is a float compared
//! with an absolute tolerance of [`EXPONENT_TOL`].

use core::cmp::Ordering;
use core::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

/// Equality tolerance for float exponents.
pub const EXPONENT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub enum Exponent {
    Rational(Ratio<i64>),
    Real(f64),
}

impl Exponent {
    pub const ZERO: Exponent = Exponent::Rational(Ratio::new_raw(0, 1));
    pub const ONE: Exponent = Exponent::Rational(Ratio::new_raw(1, 1));

    pub fn int(n: i64) -> Self {
        Exponent::Rational(Ratio::from_integer(n))
    }

    /// `num / den`. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Exponent::Rational(Ratio::new(num, den))
    }

    /// A float exponent, kept as-is (no snapping).
    pub fn real(x: f64) -> Self {
        Exponent::Real(x)
    }

    /// Used as the truncation order of expansions that are exact finite sums.
    pub fn infinity() -> Self {
        Exponent::Real(f64::INFINITY)
    }

    /// Rounds `x` to the nearest `p/q` with `q <= max_den` if one lies within
    /// `tol`, otherwise keeps the float.
    pub fn snapped(x: f64, max_den: i64, tol: f64) -> Self {
        match snap_rational(x, max_den, tol) {
            Some(r) => Exponent::Rational(r),
            None => Exponent::Real(x),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Exponent::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Exponent::Real(x) => x,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Exponent::Rational(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Real(x) if x.is_infinite())
    }

    pub fn is_integer(self) -> bool {
        match self {
            Exponent::Rational(r) => r.is_integer(),
            Exponent::Real(x) => x.is_finite() && (x - libm::round(x)).abs() <= EXPONENT_TOL,
        }
    }

    /// Member of {0, 1, 2, ...}; these are the exponents whose reciprocal
    /// gamma factor vanishes.
    pub fn is_nonneg_integer(self) -> bool {
        self.is_integer() && self.to_f64() > -0.5
    }

    pub fn is_negative(self) -> bool {
        match self {
            Exponent::Rational(r) => r < Ratio::zero(),
            Exponent::Real(x) => x < -EXPONENT_TOL,
        }
    }

    pub fn is_positive(self) -> bool {
        match self {
            Exponent::Rational(r) => r > Ratio::zero(),
            Exponent::Real(x) => x > EXPONENT_TOL,
        }
    }

    pub fn is_zero(self) -> bool {
        !self.is_negative() && !self.is_positive()
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

fn snap_rational(x: f64, max_den: i64, tol: f64) -> Option<Ratio<i64>> {
    if !x.is_finite() || x.abs() > 1e12 {
        return None;
    }
    let mut best: Option<(f64, Ratio<i64>)> = None;
    for q in 1..=max_den.max(1) {
        let p = libm::round(x * q as f64);
        let err = (x - p / q as f64).abs();
        if err <= tol && best.is_none_or(|(e, _)| err < e - 1e-15) {
            best = Some((err, Ratio::new(p as i64, q)));
        }
    }
    best.map(|(_, r)| r)
}

impl core::ops::Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        match (self, rhs) {
            (Exponent::Rational(a), Exponent::Rational(b)) => match checked_add(a, b) {
                Some(r) => Exponent::Rational(r),
                None => Exponent::Real(self.to_f64() + rhs.to_f64()),
            },
            _ => Exponent::Real(self.to_f64() + rhs.to_f64()),
        }
    }
}

impl core::ops::Neg for Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        match self {
            Exponent::Rational(r) => Exponent::Rational(-r),
            Exponent::Real(x) => Exponent::Real(-x),
        }
    }
}

impl core::ops::Sub for Exponent {
    type Output = Exponent;
    fn sub(self, rhs: Exponent) -> Exponent {
        self + (-rhs)
    }
}

fn checked_add(a: Ratio<i64>, b: Ratio<i64>) -> Option<Ratio<i64>> {
    let (an, ad) = (*a.numer() as i128, *a.denom() as i128);
    let (bn, bd) = (*b.numer() as i128, *b.denom() as i128);
    let num = an * bd + bn * ad;
    let den = ad * bd;
    let g = gcd(num.abs(), den.abs()).max(1);
    let (num, den) = (num / g, den / g);
    if num.abs() > i64::MAX as i128 || den > i64::MAX as i128 {
        return None;
    }
    Some(Ratio::new(num as i64, den as i64))
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl PartialEq for Exponent {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Exponent::Rational(a), Exponent::Rational(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                if a.is_infinite() || b.is_infinite() {
                    a == b
                } else {
                    (a - b).abs() <= EXPONENT_TOL
                }
            }
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self == other {
            return Some(Ordering::Equal);
        }
        match (self, other) {
            (Exponent::Rational(a), Exponent::Rational(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Exponent::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Exponent::Real(x) => write!(f, "{}", x),
        }
    }
}

impl From<i64> for Exponent {
    fn from(n: i64) -> Self {
        Exponent::int(n)
    }
}
