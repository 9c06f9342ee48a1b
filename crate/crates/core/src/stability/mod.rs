//! Stability verdicts from singularity inventories, and integral tests on
//! sampled impulse responses.
//!
//! A system is BIBO-stable exactly when its transfer function has no poles
//! in the closed right half-plane, no polar branch points on the imaginary
//! axis, and any branch points on the axis are regular (finite there).
//! Regular branch points still leave an algebraically decaying tail
//! `t^{-κ*-1}` in the impulse response.

mod integral;
mod signal;
mod tail;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use integral::{integral_tests, Convergence, IntegralTests, LOG_GROWTH_RATIO, P_BAND};
pub use signal::{log_grid, GridKind, SampledSignal, SignalError};
pub use tail::{fit_tail_exponent, TailFit, TailFitError, TailShape};

use crate::asymptotics::{kappa_star, AsymError, AsymExpansion, SingularityClass, Term, TimeTerm};
use crate::exponent::Exponent;
use crate::expr::TransferExpr;
use crate::nyquist::{locate_axis_zeros, AxisZero, AxisZeroOptions, NyquistError};
use crate::singularities::{
    branch_number, count_rhp_zeros, winding_number_expr, BranchError, CountError, DecayReport, Inventory, Rect,
    Role, SingularityRecord, Source, WindingOptions,
};
use crate::util::{c, cdiv};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    BiboStable,
    Unstable,
    /// Some singularity is outside the algebraic class the criterion covers.
    OutOfClass,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::BiboStable => "BIBO-stable",
            Verdict::Unstable => "unstable",
            Verdict::OutOfClass => "out-of-class",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub role: Role,
    pub verdict: Verdict,
    pub rhp_poles: u32,
    pub axis_pole_order: u32,
    pub branch_number: f64,
    pub kappa_star: Option<Exponent>,
    /// Large-`t` terms of the impulse response, dominant (smallest `p`)
    /// first.
    pub tail: Vec<TimeTerm>,
    /// `None` when the large-`|s|` decay check was not run.
    pub decay_pass: Option<bool>,
    pub assumptions: Vec<String>,
    /// Why the verdict is not BIBO-stable.
    pub reasons: Vec<String>,
    pub axis: Vec<SingularityRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StabilityError {
    Branch(BranchError),
    Asym { location: C64, error: AsymError },
    Count(CountError),
    Nyquist(NyquistError),
}

impl fmt::Display for StabilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityError::Branch(e) => write!(f, "{}", e),
            StabilityError::Asym { location, error } => {
                write!(f, "at ({}, {}): {}", location.re, location.im, error)
            }
            StabilityError::Count(e) => write!(f, "zero counting: {}", e),
            StabilityError::Nyquist(e) => write!(f, "{}", e),
        }
    }
}

impl From<BranchError> for StabilityError {
    fn from(e: BranchError) -> Self {
        StabilityError::Branch(e)
    }
}

impl From<CountError> for StabilityError {
    fn from(e: CountError) -> Self {
        StabilityError::Count(e)
    }
}

impl From<NyquistError> for StabilityError {
    fn from(e: NyquistError) -> Self {
        StabilityError::Nyquist(e)
    }
}

fn decay_assumptions(decay: Option<&DecayReport>, out: &mut Vec<String>) -> Option<bool> {
    let decay = decay?;
    if decay.pass {
        out.push(format!(
            "large-|s| decay F = K/s + O(|s|^-(1+δ)) holds numerically with K = {} and δ = {}",
            fmt_c(decay.k),
            decay.delta
        ));
    } else {
        out.push("hypotheses not met: large-|s| decay check failed; verdict is not guaranteed".into());
        for r in decay.failing_rays() {
            for n in &r.notes {
                out.push(n.clone());
            }
        }
    }
    Some(decay.pass)
}

fn fmt_c(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}j", z.re, z.im)
    }
}

struct Counts {
    rhp: u32,
    axis_poles: u32,
    branch: f64,
}

fn assemble(
    role: Role,
    counts: Counts,
    axis: Vec<SingularityRecord>,
    unsupported: &[String],
    decay: Option<&DecayReport>,
    mut assumptions: Vec<String>,
) -> StabilityReport {
    let decay_pass = decay_assumptions(decay, &mut assumptions);
    let mut reasons = Vec::new();
    if counts.rhp > 0 {
        reasons.push(format!("{} pole(s) in the open right half-plane", counts.rhp));
    }
    if counts.axis_poles > 0 {
        reasons.push(format!("poles of total order {} on the imaginary axis", counts.axis_poles));
    }
    if counts.branch > 0.0 {
        reasons.push(format!("branch number {} on the imaginary axis", counts.branch));
    }
    for r in &axis {
        if r.class == SingularityClass::PolarBranchPoint {
            reasons.push(format!("polar branch point at {}", fmt_c(r.location)));
        }
    }
    let verdict = if !unsupported.is_empty() {
        reasons.extend(unsupported.iter().cloned());
        Verdict::OutOfClass
    } else if reasons.is_empty() {
        Verdict::BiboStable
    } else {
        Verdict::Unstable
    };

    let mut tail = Vec::new();
    for r in axis.iter().filter(|r| r.on_imaginary_axis()) {
        if let Ok(td) = r.expansion.time_domain_terms() {
            tail.extend(td.terms);
        }
    }
    tail.sort_by(|a, b| a.p.partial_cmp(&b.p).unwrap_or(core::cmp::Ordering::Equal));
    let expansions: Vec<AsymExpansion> = axis.iter().map(|r| r.expansion.clone()).collect();
    let ks = kappa_star(&expansions);
    if verdict == Verdict::BiboStable {
        if let Some(k) = ks {
            assumptions.push(format!("impulse response decays like t^-({} + 1)", k));
        }
    }
    StabilityReport {
        role,
        verdict,
        rhp_poles: counts.rhp,
        axis_pole_order: counts.axis_poles,
        branch_number: counts.branch,
        kappa_star: ks,
        tail,
        decay_pass,
        assumptions,
        reasons,
        axis,
    }
}

pub fn assess_open_loop(inv: &Inventory, decay: Option<&DecayReport>) -> Result<StabilityReport, StabilityError> {
    let branch = branch_number(&inv.axis, Role::OpenLoop)?;
    let counts = Counts { rhp: inv.rhp_poles, axis_poles: inv.axis_pole_order(), branch };
    Ok(assemble(Role::OpenLoop, counts, inv.axis.clone(), &inv.unsupported, decay, inv.notes.clone()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoopOptions {
    pub region: Rect,
    pub winding: WindingOptions,
    pub axis_zeros: AxisZeroOptions,
}

impl ClosedLoopOptions {
    pub fn for_open_loop(open: &Inventory) -> Self {
        let w = open.axis.iter().map(|r| r.location.im.abs()).fold(0.0, f64::max);
        let radius = (10.0 * w).max(100.0);
        ClosedLoopOptions {
            region: Rect::right_half_plane(1e-3, radius),
            winding: WindingOptions::default(),
            axis_zeros: AxisZeroOptions::with_omega_max(radius),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoop {
    pub report: StabilityReport,
    /// Points where `1 + F_o(jω) = 0` away from open-loop singularities.
    pub axis_zeros: Vec<AxisZero>,
    /// Right half-plane zeros of `numerator + denominator` of `F_o`, an
    /// independent count of closed-loop poles.
    pub cross_check: Option<u32>,
}

/// Closed-loop `H = F_o / (1 + F_o)` from the open-loop inventory.
pub fn assess_closed_loop(
    open: &Inventory,
    f: &TransferExpr,
    decay: Option<&DecayReport>,
    opts: &ClosedLoopOptions,
) -> Result<ClosedLoop, StabilityError> {
    let mut notes = Vec::new();
    let one_plus = TransferExpr::real(1.0).plus(f.clone());
    let rhp = count_rhp_zeros(&one_plus, opts.region, open.rhp_poles, &opts.winding)?;

    let (num, den) = f.split_fraction();
    let cross_check = match winding_number_expr(&den.plus(num), opts.region, &opts.winding) {
        Ok(w) if w.count >= 0 => Some(w.count as u32),
        Ok(w) => {
            notes.push(format!("cross-check winding came out negative ({})", w.count));
            None
        }
        Err(e) => {
            notes.push(format!("cross-check zero count failed: {}", e));
            None
        }
    };
    if let Some(x) = cross_check {
        if x != rhp {
            notes.push(format!(
                "closed-loop pole counts disagree: {} from 1 + F, {} from numerator + denominator",
                rhp, x
            ));
        }
    }

    let mut axis = Vec::new();
    for r in open.axis.iter().filter(|r| r.on_imaginary_axis()) {
        let h = r
            .expansion
            .closed_loop_map()
            .map_err(|error| StabilityError::Asym { location: r.location, error })?;
        let mut rec = SingularityRecord::new(h, Source::Derived)
            .map_err(|error| StabilityError::Asym { location: r.location, error })?;
        rec.location = r.location;
        if r.is_minus_one_point() {
            rec.notes.push("open loop tends to -1 here".into());
        }
        axis.push(rec);
    }

    let exclude: Vec<f64> = open.axis.iter().filter(|r| r.on_imaginary_axis()).map(|r| r.location.im).collect();
    let zeros = locate_axis_zeros(f, &exclude, &opts.axis_zeros)?;
    let mut axis_poles = 0;
    for z in &zeros {
        axis_poles += z.multiplicity;
        let lead = z.leading;
        let h_coeff = cdiv(c(-1.0, 0.0), lead.coeff);
        let h = AsymExpansion::new(
            c(0.0, z.omega),
            alloc::vec![Term::new(-lead.kappa, h_coeff)],
            -lead.kappa + Exponent::ONE,
        )
        .map_err(|error| StabilityError::Asym { location: c(0.0, z.omega), error })?
        .with_estimated(true);
        let mut rec = SingularityRecord::new(h, Source::Estimated)
            .map_err(|error| StabilityError::Asym { location: c(0.0, z.omega), error })?;
        rec.notes.push(format!("1 + F_o vanishes here with multiplicity {}", z.multiplicity));
        axis.push(rec);
    }
    axis.sort_by(|a, b| a.location.im.partial_cmp(&b.location.im).unwrap_or(core::cmp::Ordering::Equal));

    let branch = branch_number(&open.axis, Role::ClosedLoop)?;
    let counts = Counts { rhp, axis_poles, branch };
    let report = assemble(Role::ClosedLoop, counts, axis, &open.unsupported, decay, notes);
    Ok(ClosedLoop { report, axis_zeros: zeros, cross_check })
}
