//! End-to-end analysis of one open-loop transfer function: inventory,
//! open- and closed-loop verdicts, the Nyquist test, and the cross-checks
//! between them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::asymptotics::{AsymExpansion, SingularityClass};
use crate::expr::TransferExpr;
use crate::laplace::{invert, InversionConfig};
use crate::nyquist::{
    nyquist_verdict, semicircle_increment, verify_semicircle_numeric, AxisZeroOptions, NyquistError, NyquistOptions,
    NyquistVerdict,
};
use crate::singularities::{
    check_decay, count_rhp_poles, estimate_expansion, CountError, DecayOptions, DecayReport, Inventory, Rect, Role,
    SingularityRecord, Source, WindingOptions,
};
use crate::stability::{
    assess_closed_loop, assess_open_loop, fit_tail_exponent, log_grid, ClosedLoop, ClosedLoopOptions, StabilityError,
    StabilityReport, TailFit, TailShape, Verdict,
};
use crate::util::{abs, c};
use crate::C64;

/// A point the caller knows about: either with its expansion, or to be
/// estimated numerically.
#[derive(Clone, Debug, PartialEq)]
pub enum Declaration {
    Expansion(AsymExpansion),
    Auto { location: C64, n_terms: usize },
}

impl Declaration {
    pub fn location(&self) -> C64 {
        match self {
            Declaration::Expansion(e) => e.location(),
            Declaration::Auto { location, .. } => *location,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InversionCheckOptions {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
}

impl Default for InversionCheckOptions {
    fn default() -> Self {
        InversionCheckOptions { t_min: 0.1, t_max: 1e3, per_decade: 10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisOptions {
    pub delta: f64,
    pub omega_max: Option<f64>,
    pub puncture_eps: Option<f64>,
    pub tol_rad: f64,
    /// Distance of the counting rectangle from the imaginary axis.
    pub rhp_margin: f64,
    /// Half-height and width of the counting rectangle; by default ten
    /// times the farthest axis point, at least 100.
    pub rhp_radius: Option<f64>,
    /// Analytic function whose right half-plane zeros are the poles of `F`.
    pub witness: Option<TransferExpr>,
    pub semicircle_rho: f64,
    pub inversion: Option<InversionCheckOptions>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            delta: 0.1,
            omega_max: None,
            puncture_eps: None,
            tol_rad: 0.05,
            rhp_margin: 1e-3,
            rhp_radius: None,
            witness: None,
            semicircle_rho: 1e-3,
            inversion: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisError {
    DuplicateLocation(C64),
    Count(CountError),
    Stability(StabilityError),
    Nyquist(NyquistError),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::DuplicateLocation(b) => {
                write!(f, "singularity declared twice at ({}, {})", b.re, b.im)
            }
            AnalysisError::Count(e) => write!(f, "right half-plane pole count failed: {}", e),
            AnalysisError::Stability(e) => write!(f, "closed-loop assessment failed: {}", e),
            AnalysisError::Nyquist(e) => write!(f, "Nyquist test failed: {}", e),
        }
    }
}

/// Declared expansion against direct evaluation just right of the point.
#[derive(Clone, Debug, PartialEq)]
pub struct Validation {
    pub location: C64,
    /// `(ε, |F(b+ε) - partial sum| / |partial sum|)`.
    pub residuals: Vec<(f64, f64)>,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemicircleComparison {
    pub location: C64,
    pub closed_form: f64,
    pub numeric: Option<f64>,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailCheck {
    pub expected_p: f64,
    pub fit: Option<TailFit>,
    pub flagged_samples: usize,
    pub agree: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Consistency {
    /// Closed-loop verdict from the criterion equals the Nyquist verdict.
    pub criterion_vs_nyquist: bool,
    /// `measured + π(2P_cl,+ + P_cl,j + B_cl,j) - π(2P_o,+ + P_o,j + B_o,j)`
    /// with the closed-loop numbers from the criterion path.
    pub identity_residual: f64,
    pub identity_ok: bool,
    /// Closed-loop pole count from `1 + F` equals that from numerator plus
    /// denominator, when both are available.
    pub pole_counts_agree: Option<bool>,
    pub semicircles_agree: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub inventory: Inventory,
    /// Declared points off the imaginary axis.
    pub off_axis: Vec<SingularityRecord>,
    pub validations: Vec<Validation>,
    pub decay: DecayReport,
    pub open: StabilityReport,
    pub closed: ClosedLoop,
    pub nyquist: NyquistVerdict,
    pub semicircles: Vec<SemicircleComparison>,
    pub tail_check: Option<TailCheck>,
    pub consistency: Consistency,
    pub notes: Vec<String>,
}

fn validate(f: &TransferExpr, e: &AsymExpansion) -> Validation {
    let b = e.location();
    let mut residuals = Vec::new();
    let mut note = None;
    for eps in [1e-3, 1e-4, 1e-5] {
        let s = b + c(eps, 0.0);
        match f.eval(s) {
            Ok(v) => {
                let p = e.eval_partial(s);
                residuals.push((eps, abs(v - p) / abs(p).max(1e-300)));
            }
            Err(err) => {
                note = Some(format!("F not evaluable at distance {:e}: {}", eps, err));
                break;
            }
        }
    }
    let pass = residuals.len() == 3 && residuals[2].1 < 1e-2 && residuals[2].1 <= residuals[0].1 * 1.5 + 1e-12;
    if !pass && note.is_none() {
        note = Some("declared expansion does not match F near the point".into());
    }
    Validation { location: b, residuals, pass, note }
}

fn build_inventory(
    f: &TransferExpr,
    decls: &[Declaration],
    opts: &AnalysisOptions,
) -> Result<(Inventory, Vec<SingularityRecord>, Vec<Validation>), AnalysisError> {
    for (i, a) in decls.iter().enumerate() {
        for b in &decls[i + 1..] {
            if abs(a.location() - b.location()) < 1e-12 {
                return Err(AnalysisError::DuplicateLocation(a.location()));
            }
        }
    }
    let mut notes = Vec::new();
    let mut unsupported = Vec::new();
    let mut axis = Vec::new();
    let mut off_axis = Vec::new();
    let mut validations = Vec::new();
    for d in decls {
        let rec = match d {
            Declaration::Expansion(e) => {
                validations.push(validate(f, e));
                SingularityRecord::new(e.clone(), Source::Declared)
            }
            Declaration::Auto { location, n_terms } => match estimate_expansion(f, *location, *n_terms) {
                Ok(est) => {
                    notes.extend(est.notes.iter().map(|n| format!("at {}: {}", fmt_c(*location), n)));
                    SingularityRecord::new(est.expansion, Source::Estimated)
                }
                Err(e) => {
                    unsupported.push(format!("at {}: {}", fmt_c(*location), e));
                    continue;
                }
            },
        };
        match rec {
            Ok(r) if r.on_imaginary_axis() => axis.push(r),
            Ok(r) => off_axis.push(r),
            Err(e) => unsupported.push(format!("at {}: {}", fmt_c(d.location()), e)),
        }
    }
    axis.sort_by(|a, b| a.location.im.partial_cmp(&b.location.im).unwrap_or(core::cmp::Ordering::Equal));

    let rect = counting_rect(&axis, opts);
    let rhp_poles = count_rhp_poles(f, rect, opts.witness.as_ref(), &WindingOptions::default())
        .map_err(AnalysisError::Count)?;
    let declared_rhp: u32 = off_axis
        .iter()
        .filter(|r| r.location.re > 0.0)
        .map(|r| match r.class {
            SingularityClass::Pole(m) => m,
            _ => 0,
        })
        .sum();
    if declared_rhp > rhp_poles {
        notes.push(format!(
            "{} right half-plane pole(s) declared but only {} counted in the region",
            declared_rhp, rhp_poles
        ));
    }
    notes.push("the inventory is taken as exhaustive: declared axis points plus the numeric pole count".into());
    let inv = Inventory { role: Role::OpenLoop, rhp_poles, axis, notes, unsupported };
    Ok((inv, off_axis, validations))
}

fn counting_rect(axis: &[SingularityRecord], opts: &AnalysisOptions) -> Rect {
    let w = axis.iter().map(|r| r.location.im.abs()).fold(0.0, f64::max);
    let radius = opts.rhp_radius.unwrap_or((10.0 * w).max(100.0));
    Rect::right_half_plane(opts.rhp_margin, radius)
}

fn fmt_c(z: C64) -> String {
    format!("({}, {})", z.re, z.im)
}

fn tail_check(f: &TransferExpr, expected_p: f64, opts: &InversionCheckOptions) -> TailCheck {
    let times = log_grid(opts.t_min, opts.t_max, opts.per_decade, f64::INFINITY);
    let mut out = TailCheck { expected_p, fit: None, flagged_samples: 0, agree: false, note: None };
    let inv = match invert(f, &InversionConfig::new(times)) {
        Ok(i) => i,
        Err(e) => {
            out.note = Some(format!("inversion failed: {}", e));
            return out;
        }
    };
    out.flagged_samples = inv.flagged_count();
    match inv.signal().map(|g| fit_tail_exponent(&g)) {
        Ok(Ok(fit)) => {
            out.agree = fit.shape == TailShape::PowerLaw && (fit.p - expected_p).abs() < 0.1;
            out.fit = Some(fit);
        }
        Ok(Err(e)) => out.note = Some(format!("{}", e)),
        Err(e) => out.note = Some(format!("{}", e)),
    }
    out
}

pub fn analyze(f: &TransferExpr, decls: &[Declaration], opts: &AnalysisOptions) -> Result<Analysis, AnalysisError> {
    let (inventory, off_axis, validations) = build_inventory(f, decls, opts)?;
    let mut notes = Vec::new();
    let decay = check_decay(f, &DecayOptions { delta: opts.delta, ..DecayOptions::default() });
    let open = assess_open_loop(&inventory, Some(&decay)).map_err(AnalysisError::Stability)?;

    let mut nopts = NyquistOptions { omega_max: opts.omega_max, eps: opts.puncture_eps, tol: opts.tol_rad, ..NyquistOptions::default() };
    let rect = counting_rect(&inventory.axis, opts);
    let zero_range = opts.omega_max.unwrap_or(rect.im_max);
    nopts.axis_zeros = Some(AxisZeroOptions::with_omega_max(zero_range));
    let copts = ClosedLoopOptions {
        region: rect,
        winding: WindingOptions::default(),
        axis_zeros: AxisZeroOptions::with_omega_max(zero_range),
    };
    let closed = assess_closed_loop(&inventory, f, Some(&decay), &copts).map_err(AnalysisError::Stability)?;
    let nyquist = nyquist_verdict(f, &inventory, &nopts).map_err(AnalysisError::Nyquist)?;

    let mut semicircles = Vec::new();
    let zero_records: Vec<SingularityRecord> = nyquist
        .axis_zeros
        .iter()
        .filter_map(|z| SingularityRecord::new(z.open_loop_expansion(), Source::Estimated).ok())
        .collect();
    for r in inventory.axis.iter().chain(zero_records.iter()) {
        let closed_form = match semicircle_increment(r) {
            Ok(v) => v,
            Err(e) => {
                notes.push(format!("no semicircle increment at {}: {}", fmt_c(r.location), e));
                continue;
            }
        };
        let rho = opts.semicircle_rho.min(0.25 * nearest_other(r, &inventory.axis, &zero_records));
        let numeric = verify_semicircle_numeric(f, r.location, rho).ok().map(|v| v.value);
        let agree = numeric.is_some_and(|v| (v - closed_form).abs() < 2e-2);
        semicircles.push(SemicircleComparison { location: r.location, closed_form, numeric, agree });
    }

    let cl = &closed.report;
    let identity_residual = nyquist.measured
        + PI * (2.0 * cl.rhp_poles as f64 + cl.axis_pole_order as f64 + cl.branch_number)
        - nyquist.required;
    let consistency = Consistency {
        criterion_vs_nyquist: (cl.verdict == Verdict::BiboStable) == nyquist.stable,
        identity_residual,
        identity_ok: identity_residual.abs() < opts.tol_rad,
        pole_counts_agree: closed.cross_check.map(|x| x == cl.rhp_poles),
        semicircles_agree: semicircles.iter().all(|s| s.agree),
    };
    if !consistency.criterion_vs_nyquist {
        notes.push("criterion and Nyquist verdicts disagree".into());
    }

    let tail_check = match (&opts.inversion, open.verdict, open.kappa_star) {
        (Some(io), Verdict::BiboStable, Some(k)) => Some(tail_check(f, k.to_f64() + 1.0, io)),
        _ => None,
    };

    Ok(Analysis {
        inventory,
        off_axis,
        validations,
        decay,
        open,
        closed,
        nyquist,
        semicircles,
        tail_check,
        consistency,
        notes,
    })
}

fn nearest_other(r: &SingularityRecord, a: &[SingularityRecord], b: &[SingularityRecord]) -> f64 {
    a.iter()
        .chain(b.iter())
        .map(|o| abs(o.location - r.location))
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::Term;
    use crate::exponent::Exponent;
    use crate::expr::parse;

    fn example(k: f64) -> (TransferExpr, Vec<Declaration>) {
        let f = parse(&format!("{}/(s^1.5*(s+1))", k)).unwrap();
        let e = AsymExpansion::new(
            c(0.0, 0.0),
            alloc::vec![
                Term::new(Exponent::ratio(-3, 2), c(k, 0.0)),
                Term::new(Exponent::ratio(-1, 2), c(-k, 0.0)),
                Term::new(Exponent::ratio(1, 2), c(k, 0.0)),
            ],
            Exponent::ratio(3, 2),
        )
        .unwrap();
        (f, alloc::vec![Declaration::Expansion(e)])
    }

    #[test]
    fn fractional_example_end_to_end() {
        for (k, stable) in [(1.0, true), (2.0, false), (core::f64::consts::SQRT_2, false)] {
            let (f, d) = example(k);
            let a = analyze(&f, &d, &AnalysisOptions::default()).unwrap();
            assert_eq!(a.open.verdict, Verdict::Unstable);
            assert_eq!(a.closed.report.verdict == Verdict::BiboStable, stable, "K = {}", k);
            assert_eq!(a.nyquist.stable, stable);
            assert!(a.consistency.criterion_vs_nyquist);
            assert!(a.consistency.identity_ok, "{}", a.consistency.identity_residual);
            assert!(a.validations[0].pass, "{:?}", a.validations);
            assert!(a.consistency.semicircles_agree, "{:?}", a.semicircles);
        }
    }

    #[test]
    fn auto_declaration_and_duplicates() {
        let f = parse("1/(s+1)").unwrap();
        let d = [Declaration::Auto { location: c(0.0, 0.0), n_terms: 2 }];
        let a = analyze(&f, &d, &AnalysisOptions::default()).unwrap();
        assert_eq!(a.open.verdict, Verdict::BiboStable);
        assert_eq!(a.inventory.axis[0].class, SingularityClass::Removable);
        let dup = [d[0].clone(), d[0].clone()];
        assert!(matches!(analyze(&f, &dup, &AnalysisOptions::default()), Err(AnalysisError::DuplicateLocation(_))));
    }
}
