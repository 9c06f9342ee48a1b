//! Serializable views of an analysis and their JSON/text renderings.

use std::fmt::Write as _;

use bibo_core::analysis::{Analysis, AnalysisOptions, TailCheck};
use bibo_core::nyquist::{AxisZero, EndpointLimit, NyquistVerdict};
use bibo_core::singularities::{Role, SingularityRecord, Source};
use bibo_core::stability::{StabilityReport, TailFit};
use bibo_core::{AsymExpansion, Exponent, TimeTerm, C64};
use serde::Serialize;

pub const TOOL: &str = "bibo";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn cx(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn ex(e: Exponent) -> String {
    e.to_string()
}

#[derive(Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Tool {
    pub fn current() -> Self {
        Tool { name: TOOL, version: VERSION }
    }
}

#[derive(Serialize)]
pub struct TermView {
    pub kappa: String,
    pub c: [f64; 2],
}

#[derive(Serialize)]
pub struct ExpansionView {
    pub b: [f64; 2],
    pub terms: Vec<TermView>,
    pub kappa_max: String,
    pub estimated: bool,
}

impl From<&AsymExpansion> for ExpansionView {
    fn from(e: &AsymExpansion) -> Self {
        ExpansionView {
            b: cx(e.location()),
            terms: e.terms().iter().map(|t| TermView { kappa: ex(t.kappa), c: cx(t.coeff) }).collect(),
            kappa_max: ex(e.kappa_max()),
            estimated: e.is_estimated(),
        }
    }
}

fn source_name(s: Source) -> &'static str {
    match s {
        Source::Declared => "declared",
        Source::Estimated => "estimated",
        Source::Derived => "derived",
    }
}

fn role_name(r: Role) -> &'static str {
    match r {
        Role::OpenLoop => "open-loop",
        Role::ClosedLoop => "closed-loop",
    }
}

#[derive(Serialize)]
pub struct RecordView {
    pub location: [f64; 2],
    pub class: &'static str,
    pub source: &'static str,
    pub expansion: ExpansionView,
    pub notes: Vec<String>,
}

impl From<&SingularityRecord> for RecordView {
    fn from(r: &SingularityRecord) -> Self {
        RecordView {
            location: cx(r.location),
            class: r.class.name(),
            source: source_name(r.source),
            expansion: (&r.expansion).into(),
            notes: r.notes.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct TimeTermView {
    pub omega: f64,
    pub p: f64,
    pub kappa: String,
    pub coeff: [f64; 2],
}

impl From<&TimeTerm> for TimeTermView {
    fn from(t: &TimeTerm) -> Self {
        TimeTermView { omega: t.omega, p: t.p, kappa: ex(t.kappa), coeff: cx(t.coeff) }
    }
}

#[derive(Serialize)]
pub struct StabilityView {
    pub role: &'static str,
    pub verdict: &'static str,
    pub rhp_poles: u32,
    pub axis_pole_order: u32,
    pub branch_number: f64,
    pub kappa_star: Option<String>,
    pub dominant_term: Option<TimeTermView>,
    pub tail: Vec<TimeTermView>,
    pub decay_check_passed: Option<bool>,
    pub reasons: Vec<String>,
    pub assumptions: Vec<String>,
    pub axis: Vec<RecordView>,
}

impl From<&StabilityReport> for StabilityView {
    fn from(r: &StabilityReport) -> Self {
        StabilityView {
            role: role_name(r.role),
            verdict: r.verdict.name(),
            rhp_poles: r.rhp_poles,
            axis_pole_order: r.axis_pole_order,
            branch_number: r.branch_number,
            kappa_star: r.kappa_star.map(ex),
            dominant_term: r.tail.first().map(Into::into),
            tail: r.tail.iter().map(Into::into).collect(),
            decay_check_passed: r.decay_pass,
            reasons: r.reasons.clone(),
            assumptions: r.assumptions.clone(),
            axis: r.axis.iter().map(Into::into).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct AxisZeroView {
    pub omega: f64,
    pub multiplicity: u32,
    pub leading: TermView,
    pub residual: f64,
}

impl From<&AxisZero> for AxisZeroView {
    fn from(z: &AxisZero) -> Self {
        AxisZeroView {
            omega: z.omega,
            multiplicity: z.multiplicity,
            leading: TermView { kappa: ex(z.leading.kappa), c: cx(z.leading.coeff) },
            residual: z.residual,
        }
    }
}

#[derive(Serialize)]
pub struct ClosedLoopView {
    #[serde(flatten)]
    pub report: StabilityView,
    pub axis_zeros: Vec<AxisZeroView>,
    /// Right half-plane zero count of numerator plus denominator.
    pub cross_check_rhp_poles: Option<u32>,
}

fn limit_view(l: &EndpointLimit) -> String {
    match l {
        EndpointLimit::Infinity => "infinity".into(),
        EndpointLimit::Phase(p) => format!("phase {}", p),
        EndpointLimit::Unknown => "unknown".into(),
    }
}

#[derive(Serialize)]
pub struct SegmentView {
    pub start: f64,
    pub end: f64,
    pub delta: f64,
    pub limit_delta: Option<f64>,
    pub start_limit: String,
    pub end_limit: String,
    pub nodes: usize,
}

#[derive(Serialize)]
pub struct SweepView {
    pub total_delta: f64,
    pub limit_total: Option<f64>,
    pub raw_totals: [f64; 3],
    pub extrapolation_residual: f64,
    pub eps: f64,
    pub omega_max: f64,
    pub tail_bound: f64,
    pub evaluations: usize,
    pub punctures: Vec<f64>,
    pub segments: Vec<SegmentView>,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
pub struct DecompositionView {
    pub p_cl_plus: f64,
    pub p_cl_j: u32,
    pub b_cl_j: f64,
    pub consistent: bool,
}

#[derive(Serialize)]
pub struct NyquistView {
    pub measured: f64,
    pub required: f64,
    pub stable: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub decomposition: DecompositionView,
    pub sweep: SweepView,
}

impl From<&NyquistVerdict> for NyquistView {
    fn from(v: &NyquistVerdict) -> Self {
        let s = &v.sweep;
        NyquistView {
            measured: v.measured,
            required: v.required,
            stable: v.stable,
            residual: v.residual,
            tolerance: v.tolerance,
            decomposition: DecompositionView {
                p_cl_plus: v.decomposition.p_cl_plus,
                p_cl_j: v.decomposition.p_cl_j,
                b_cl_j: v.decomposition.b_cl_j,
                consistent: v.decomposition.consistent,
            },
            sweep: SweepView {
                total_delta: s.total_delta,
                limit_total: s.limit_total,
                raw_totals: s.raw_totals,
                extrapolation_residual: s.extrapolation_residual,
                eps: s.eps,
                omega_max: s.omega_max,
                tail_bound: s.tail_bound,
                evaluations: s.evaluations,
                punctures: s.punctures.iter().map(|p| p.omega).collect(),
                segments: s
                    .segments
                    .iter()
                    .map(|g| SegmentView {
                        start: g.start,
                        end: g.end,
                        delta: g.delta,
                        limit_delta: g.limit_delta,
                        start_limit: limit_view(&g.start_limit),
                        end_limit: limit_view(&g.end_limit),
                        nodes: g.points.len(),
                    })
                    .collect(),
                notes: s.notes.clone(),
            },
        }
    }
}

#[derive(Serialize)]
pub struct TailFitView {
    pub shape: &'static str,
    pub p: f64,
    pub coeff: [f64; 2],
    pub residual: f64,
    pub rate: Option<f64>,
    pub omega: Option<f64>,
    pub envelope: bool,
    pub window: [f64; 2],
    pub points: usize,
}

impl From<&TailFit> for TailFitView {
    fn from(f: &TailFit) -> Self {
        TailFitView {
            shape: f.shape.name(),
            p: f.p,
            coeff: cx(f.coeff),
            residual: f.residual,
            rate: f.rate,
            omega: f.omega,
            envelope: f.envelope,
            window: [f.window.0, f.window.1],
            points: f.points,
        }
    }
}

#[derive(Serialize)]
pub struct TailCheckView {
    pub expected_p: f64,
    pub fit: Option<TailFitView>,
    pub flagged_samples: usize,
    pub agree: bool,
    pub note: Option<String>,
}

impl From<&TailCheck> for TailCheckView {
    fn from(t: &TailCheck) -> Self {
        TailCheckView {
            expected_p: t.expected_p,
            fit: t.fit.as_ref().map(Into::into),
            flagged_samples: t.flagged_samples,
            agree: t.agree,
            note: t.note.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct EffectiveOptions {
    pub delta: f64,
    pub omega_max: f64,
    pub puncture_eps: f64,
    pub tol_rad: f64,
    pub rhp_margin: f64,
    pub rhp_radius: Option<f64>,
    pub semicircle_rho: f64,
    pub witness: Option<String>,
}

#[derive(Serialize)]
pub struct InventoryView {
    pub rhp_poles: u32,
    pub axis: Vec<RecordView>,
    pub off_axis: Vec<RecordView>,
    pub unsupported: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
pub struct ValidationView {
    pub location: [f64; 2],
    /// `[ε, relative residual]` pairs.
    pub residuals: Vec<[f64; 2]>,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Serialize)]
pub struct DecayView {
    pub k: [f64; 2],
    pub delta: f64,
    pub pass: bool,
    /// Angles of failing rays, as fractions of π.
    pub failing_rays: Vec<f64>,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
pub struct SemicircleView {
    pub location: [f64; 2],
    pub closed_form: f64,
    pub numeric: Option<f64>,
    pub agree: bool,
}

#[derive(Serialize)]
pub struct ConsistencyView {
    pub criterion_vs_nyquist: bool,
    pub identity_residual: f64,
    pub identity_ok: bool,
    pub pole_counts_agree: Option<bool>,
    pub semicircles_agree: bool,
}

#[derive(Serialize)]
pub struct AnalysisReport {
    pub tool: Tool,
    pub manifest_sha256: String,
    pub expression: String,
    pub options: EffectiveOptions,
    pub inventory: InventoryView,
    pub validations: Vec<ValidationView>,
    pub decay: DecayView,
    pub open_loop: StabilityView,
    pub closed_loop: ClosedLoopView,
    pub nyquist: NyquistView,
    pub semicircles: Vec<SemicircleView>,
    pub consistency: ConsistencyView,
    pub tail_check: Option<TailCheckView>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    pub fn new(a: &Analysis, opts: &AnalysisOptions, expression: String, manifest_sha256: String) -> Self {
        AnalysisReport {
            tool: Tool::current(),
            manifest_sha256,
            expression,
            options: EffectiveOptions {
                delta: opts.delta,
                omega_max: a.nyquist.sweep.omega_max,
                puncture_eps: a.nyquist.sweep.eps,
                tol_rad: opts.tol_rad,
                rhp_margin: opts.rhp_margin,
                rhp_radius: opts.rhp_radius,
                semicircle_rho: opts.semicircle_rho,
                witness: opts.witness.as_ref().map(|w| w.to_string()),
            },
            inventory: InventoryView {
                rhp_poles: a.inventory.rhp_poles,
                axis: a.inventory.axis.iter().map(Into::into).collect(),
                off_axis: a.off_axis.iter().map(Into::into).collect(),
                unsupported: a.inventory.unsupported.clone(),
                notes: a.inventory.notes.clone(),
            },
            validations: a
                .validations
                .iter()
                .map(|v| ValidationView {
                    location: cx(v.location),
                    residuals: v.residuals.iter().map(|&(e, r)| [e, r]).collect(),
                    pass: v.pass,
                    note: v.note.clone(),
                })
                .collect(),
            decay: DecayView {
                k: cx(a.decay.k),
                delta: a.decay.delta,
                pass: a.decay.pass,
                failing_rays: a.decay.failing_rays().map(|r| r.angle).collect(),
                notes: a.decay.notes.clone(),
            },
            open_loop: (&a.open).into(),
            closed_loop: ClosedLoopView {
                report: (&a.closed.report).into(),
                axis_zeros: a.closed.axis_zeros.iter().map(Into::into).collect(),
                cross_check_rhp_poles: a.closed.cross_check,
            },
            nyquist: (&a.nyquist).into(),
            semicircles: a
                .semicircles
                .iter()
                .map(|s| SemicircleView {
                    location: cx(s.location),
                    closed_form: s.closed_form,
                    numeric: s.numeric,
                    agree: s.agree,
                })
                .collect(),
            consistency: ConsistencyView {
                criterion_vs_nyquist: a.consistency.criterion_vs_nyquist,
                identity_residual: a.consistency.identity_residual,
                identity_ok: a.consistency.identity_ok,
                pole_counts_agree: a.consistency.pole_counts_agree,
                semicircles_agree: a.consistency.semicircles_agree,
            },
            tail_check: a.tail_check.as_ref().map(Into::into),
            notes: a.notes.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let w = &mut o;
        let _ = writeln!(w, "{} {}", self.tool.name, self.tool.version);
        let _ = writeln!(w, "manifest sha256 {}", self.manifest_sha256);
        let _ = writeln!(w, "F_o(s) = {}", self.expression);
        let _ = writeln!(w);
        let _ = writeln!(w, "open loop:   {}", self.open_loop.verdict);
        let _ = writeln!(w, "closed loop: {}", self.closed_loop.report.verdict);
        let nyq = if self.nyquist.stable { "stable" } else { "unstable" };
        let _ = writeln!(w, "nyquist:     {}", nyq);
        let _ = writeln!(w);
        for (name, r) in [("open loop", &self.open_loop), ("closed loop", &self.closed_loop.report)] {
            let _ = writeln!(w, "[{}]", name);
            let _ = writeln!(
                w,
                "  P+ = {}  Pj = {}  Bj = {}  kappa* = {}",
                r.rhp_poles,
                r.axis_pole_order,
                r.branch_number,
                r.kappa_star.as_deref().unwrap_or("none")
            );
            for a in &r.axis {
                let _ = writeln!(
                    w,
                    "  at {}: {}, {}",
                    fmt_c(a.location),
                    a.class,
                    a.expansion.terms.iter().map(|t| format!("({})(s-b)^{}", fmt_c(t.c), t.kappa)).collect::<Vec<_>>().join(" + ")
                );
            }
            if let Some(t) = &r.dominant_term {
                let _ = writeln!(w, "  dominant tail ({}) t^{} e^(j{} t)", fmt_c(t.coeff), -t.p, t.omega);
            }
            for reason in &r.reasons {
                let _ = writeln!(w, "  reason: {}", reason);
            }
            for a in &r.assumptions {
                let _ = writeln!(w, "  assumes: {}", a);
            }
        }
        for z in &self.closed_loop.axis_zeros {
            let _ = writeln!(w, "  1+F_o = 0 at j{} (multiplicity {})", z.omega, z.multiplicity);
        }
        let n = &self.nyquist;
        let _ = writeln!(w, "[nyquist]");
        let _ = writeln!(w, "  measured {:.6} rad ({:.6} pi)", n.measured, n.measured / std::f64::consts::PI);
        let _ = writeln!(w, "  required {:.6} rad ({:.6} pi)", n.required, n.required / std::f64::consts::PI);
        let _ = writeln!(w, "  residual {:.3e} (tolerance {})", n.residual, n.tolerance);
        let _ = writeln!(
            w,
            "  P_cl+ = {:.4}  P_cl,j = {}  B_cl,j = {}",
            n.decomposition.p_cl_plus, n.decomposition.p_cl_j, n.decomposition.b_cl_j
        );
        let _ = writeln!(
            w,
            "  eps {:e}  omega_max {}  punctures {:?}  evaluations {}",
            n.sweep.eps, n.sweep.omega_max, n.sweep.punctures, n.sweep.evaluations
        );
        let c = &self.consistency;
        let _ = writeln!(w, "[consistency]");
        let _ = writeln!(w, "  criterion vs nyquist {}", ok(c.criterion_vs_nyquist));
        let _ = writeln!(w, "  identity residual {:.3e} {}", c.identity_residual, ok(c.identity_ok));
        if let Some(p) = c.pole_counts_agree {
            let _ = writeln!(w, "  closed-loop pole counts {}", ok(p));
        }
        let _ = writeln!(w, "  semicircles {}", ok(c.semicircles_agree));
        if let Some(t) = &self.tail_check {
            let got = t.fit.as_ref().map_or("no fit".to_string(), |f| format!("{:.4}", f.p));
            let _ = writeln!(w, "  inverted tail p {} vs {} {}", got, t.expected_p, ok(t.agree));
        }
        if !self.decay.pass {
            let _ = writeln!(w, "  decay check failed on rays {:?} (fractions of pi)", self.decay.failing_rays);
        }
        for v in self.validations.iter().filter(|v| !v.pass) {
            let _ = writeln!(w, "  declared expansion at {}: {}", fmt_c(v.location), v.note.as_deref().unwrap_or("mismatch"));
        }
        for u in &self.inventory.unsupported {
            let _ = writeln!(w, "  unsupported: {}", u);
        }
        for note in self.notes.iter().chain(&self.nyquist.sweep.notes) {
            let _ = writeln!(w, "  note: {}", note);
        }
        o
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISMATCH"
    }
}

pub fn fmt_c(z: [f64; 2]) -> String {
    if z[1] == 0.0 {
        format!("{}", z[0])
    } else {
        format!("{}{:+}j", z[0], z[1])
    }
}
