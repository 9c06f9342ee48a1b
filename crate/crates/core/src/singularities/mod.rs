//! Singularity inventory: classified points on the imaginary axis plus
//! counts of poles in the open right half-plane.

mod decay;
mod estimate;
mod winding;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use decay::{check_decay, check_decay_with, DecayOptions, DecayReport, RayCheck};
pub use estimate::{estimate_expansion, estimate_expansion_with, Estimate, EstimateError, EstimateOptions, TermDiagnostic};
pub use winding::{winding_number, winding_number_expr, Rect, Winding, WindingError, WindingOptions};

use crate::asymptotics::{AsymError, AsymExpansion, SingularityClass};
use crate::expr::TransferExpr;
use crate::util::{abs, c};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    OpenLoop,
    ClosedLoop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    /// Expansion supplied with the problem.
    Declared,
    /// Expansion estimated numerically at a suspected point.
    Estimated,
    /// Expansion obtained from others (e.g. the closed-loop map).
    Derived,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityRecord {
    pub location: C64,
    pub class: SingularityClass,
    pub expansion: AsymExpansion,
    pub source: Source,
    pub notes: Vec<String>,
}

/// Points with `|Re b|` below this are taken to lie on the imaginary axis.
pub const AXIS_SNAP: f64 = 1e-9;

impl SingularityRecord {
    pub fn new(expansion: AsymExpansion, source: Source) -> Result<Self, AsymError> {
        let mut notes = Vec::new();
        let mut location = expansion.location();
        if location.re != 0.0 && location.re.abs() < AXIS_SNAP {
            notes.push(format!("real part {:e} of location snapped to 0", location.re));
            location.re = 0.0;
        }
        let mut class = expansion.classify()?;
        if class == SingularityClass::Analytic && source == Source::Estimated {
            class = SingularityClass::Removable;
        }
        Ok(SingularityRecord { location, class, expansion, source, notes })
    }

    pub fn on_imaginary_axis(&self) -> bool {
        self.location.re.abs() < AXIS_SNAP
    }

    /// Open-loop point where `F → -1`: the closed loop has a singularity
    /// here whose strength is the next exponent.
    pub fn is_minus_one_point(&self) -> bool {
        let Some(lead) = self.expansion.leading() else {
            return false;
        };
        let tol = if self.expansion.is_estimated() { 1e-9 } else { 1e-12 };
        lead.kappa.is_zero() && abs(lead.coeff + c(1.0, 0.0)) <= tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BranchError {
    /// A `-1` point whose expansion stops after the constant term.
    MissingSecondTerm(C64),
}

impl fmt::Display for BranchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchError::MissingSecondTerm(b) => write!(
                f,
                "expansion at ({}, {}) tends to -1 but has no second term",
                b.re, b.im
            ),
        }
    }
}

/// Open loop: sum of `-κ_0` over polar branch points.
/// Closed loop: from the open-loop records, sum of `κ_1` over points where
/// the open-loop expansion starts with `-1`.
pub fn branch_number(open_loop: &[SingularityRecord], role: Role) -> Result<f64, BranchError> {
    let mut total = 0.0;
    for r in open_loop.iter().filter(|r| r.on_imaginary_axis()) {
        match role {
            Role::OpenLoop => {
                if r.class == SingularityClass::PolarBranchPoint {
                    total -= r.expansion.leading().map_or(0.0, |t| t.kappa.to_f64());
                }
            }
            Role::ClosedLoop => {
                if r.is_minus_one_point() {
                    let next = r.expansion.terms().get(1).ok_or(BranchError::MissingSecondTerm(r.location))?;
                    total += next.kappa.to_f64();
                }
            }
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inventory {
    pub role: Role,
    pub rhp_poles: u32,
    /// Classified points on the imaginary axis.
    pub axis: Vec<SingularityRecord>,
    pub notes: Vec<String>,
    /// Points whose behaviour falls outside the algebraic class.
    pub unsupported: Vec<String>,
}

impl Inventory {
    /// Total order of poles on the imaginary axis.
    pub fn axis_pole_order(&self) -> u32 {
        self.axis
            .iter()
            .map(|r| match r.class {
                SingularityClass::Pole(m) => m,
                _ => 0,
            })
            .sum()
    }

    pub fn polar_branch_points(&self) -> impl Iterator<Item = &SingularityRecord> {
        self.axis.iter().filter(|r| r.class == SingularityClass::PolarBranchPoint)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CountError {
    Winding(WindingError),
    Negative(i64),
}

impl fmt::Display for CountError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountError::Winding(e) => write!(f, "{}", e),
            CountError::Negative(n) => write!(f, "zero count came out negative ({})", n),
        }
    }
}

impl From<WindingError> for CountError {
    fn from(e: WindingError) -> Self {
        CountError::Winding(e)
    }
}

/// Poles of `f` in `region`, counted as zeros of a denominator that is
/// analytic there: `witness` when given, otherwise the denominator from
/// [`TransferExpr::split_fraction`].
pub fn count_rhp_poles(
    f: &TransferExpr,
    region: Rect,
    witness: Option<&TransferExpr>,
    opts: &WindingOptions,
) -> Result<u32, CountError> {
    let den = match witness {
        Some(w) => w.clone(),
        None => f.split_fraction().1,
    };
    if den.as_const().is_some() {
        return Ok(0);
    }
    let w = winding_number_expr(&den, region, opts)?;
    u32::try_from(w.count).map_err(|_| CountError::Negative(w.count))
}

/// Zeros of `f` in `region`: winding number plus the pole count.
pub fn count_rhp_zeros(
    f: &TransferExpr,
    region: Rect,
    poles: u32,
    opts: &WindingOptions,
) -> Result<u32, CountError> {
    let w = winding_number_expr(f, region, opts)?;
    let n = w.count + poles as i64;
    u32::try_from(n).map_err(|_| CountError::Negative(n))
}
