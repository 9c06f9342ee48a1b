//! Generalized Nyquist test on the punctured imaginary axis.
//!
//! The argument change of `1 + F_o(jω)` over the axis with every imaginary
//! singularity cut out is compared against `π(2P_{o,+} + P_{o,j} + B_{o,j})`.
//! Whatever is left over equals `-π(2P_{cl,+} + P_{cl,j} + B_{cl,j})`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use core::fmt;

use crate::asymptotics::{AsymExpansion, Term};
use crate::exponent::Exponent;
use crate::expr::{EvalError, TransferExpr};
use crate::quad::Adaptive;
use crate::singularities::{branch_number, Inventory, Role, SingularityRecord};
use crate::util::{abs, aitken, c, cdiv, wrap_angle};
use crate::C64;

/// Real part used when sampling the axis, so that cuts lying on the axis
/// are approached from the right half-plane.
const AXIS_NUDGE: f64 = 1e-150;

/// Initial sweep nodes are at most this far apart, relative to `max(1, |ω|)`.
const MAX_REL_STEP: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub enum NyquistError {
    UndeclaredSingularity { omega: f64 },
    OmegaTooSmall { omega: f64, magnitude: f64 },
    BadPunctures(String),
    Expansion(String),
    Quadrature { rho: f64 },
}

impl fmt::Display for NyquistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NyquistError::UndeclaredSingularity { omega } => {
                write!(f, "undeclared singularity near ω = {}", omega)
            }
            NyquistError::OmegaTooSmall { omega, magnitude } => {
                write!(f, "Ω too small: |F_o(jΩ)| = {:e} at Ω = {}", magnitude, omega)
            }
            NyquistError::BadPunctures(m) => write!(f, "invalid punctures: {}", m),
            NyquistError::Expansion(m) => write!(f, "{}", m),
            NyquistError::Quadrature { rho } => write!(f, "quadrature failure near cut (ϱ = {:e})", rho),
        }
    }
}

/// `F(jω)` continued from the right half-plane. Fails when the exact axis
/// point is singular.
pub fn eval_axis(f: &TransferExpr, omega: f64) -> Result<C64, EvalError> {
    f.eval(c(0.0, omega))?;
    f.eval(c(AXIS_NUDGE, omega))
}

fn eval_nudged(f: &TransferExpr, omega: f64) -> Result<C64, NyquistError> {
    f.eval(c(AXIS_NUDGE, omega)).map_err(|_| NyquistError::UndeclaredSingularity { omega })
}

/// An excluded point `jω` and, when known, the dominant term of
/// `1 + F_o` there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Puncture {
    pub omega: f64,
    pub leading: Option<Term>,
}

impl Puncture {
    pub fn from_record(r: &SingularityRecord) -> Self {
        let leading = r.expansion.add(&AsymExpansion::one(r.location)).ok().and_then(|e| e.leading());
        Puncture { omega: r.location.im, leading }
    }

    pub fn from_zero(z: &AxisZero) -> Self {
        Puncture { omega: z.omega, leading: Some(z.leading) }
    }

    /// Limiting phase of `1 + F_o(jω)` as `ω` approaches from above
    /// (`side > 0`) or below.
    pub fn limit_phase(&self, side: f64) -> Option<f64> {
        let t = self.leading?;
        let dir = if side > 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
        Some(t.coeff.arg() + t.kappa.to_f64() * dir)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EndpointLimit {
    /// The segment runs out to `±∞`, where the phase tends to 0.
    Infinity,
    /// Limiting phase from the dominant term at a puncture.
    Phase(f64),
    /// No expansion known at the puncture.
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// `(ω, 1 + F_o(jω))` at the accepted nodes.
    pub points: Vec<(f64, C64)>,
    /// Unwrapped phase change across the sampled interval.
    pub delta: f64,
    pub start_limit: EndpointLimit,
    pub end_limit: EndpointLimit,
    /// `delta` plus the change into the one-sided limits at both ends.
    pub limit_delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NyquistSweep {
    pub segments: Vec<Segment>,
    /// Extrapolated to `ε → 0`.
    pub total_delta: f64,
    /// Sum of `limit_delta` when every endpoint limit is known.
    pub limit_total: Option<f64>,
    /// Totals at `ε`, `ε/2`, `ε/4`.
    pub raw_totals: [f64; 3],
    pub extrapolation_residual: f64,
    pub punctures: Vec<Puncture>,
    pub eps: f64,
    pub omega_max: f64,
    /// Bound `arcsin |F_o(±jΩ)|` on the argument change beyond `±Ω`.
    pub tail_bound: f64,
    pub evaluations: usize,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub per_decade: usize,
    pub max_depth: u32,
    pub max_evaluations: usize,
    /// Double `Ω` until the tail bound is met instead of failing.
    pub grow_omega: bool,
    pub tail_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { per_decade: 16, max_depth: 48, max_evaluations: 4_000_000, grow_omega: true, tail_tol: 0.01 }
    }
}

/// Default `Ω`: ten times the farthest puncture, at least 100.
pub fn default_omega_max(punctures: &[Puncture]) -> f64 {
    let w = punctures.iter().map(|p| p.omega.abs()).fold(0.0, f64::max);
    (10.0 * w).max(100.0)
}

/// Default `ε`: 1e-3, shrunk to a quarter of the closest puncture spacing.
pub fn default_eps(punctures: &[Puncture]) -> f64 {
    let mut eps: f64 = 1e-3;
    for (i, a) in punctures.iter().enumerate() {
        for b in &punctures[i + 1..] {
            let d = (a.omega - b.omega).abs();
            if d > 0.0 {
                eps = eps.min(0.25 * d);
            }
        }
    }
    eps
}

struct Tracer<'a> {
    f: &'a TransferExpr,
    opts: SweepOptions,
    evaluations: usize,
}

impl<'a> Tracer<'a> {
    fn g(&mut self, omega: f64) -> Result<C64, NyquistError> {
        self.evaluations += 1;
        if self.evaluations > self.opts.max_evaluations {
            return Err(NyquistError::UndeclaredSingularity { omega });
        }
        let v = eval_axis(self.f, omega).map_err(|_| NyquistError::UndeclaredSingularity { omega })? + c(1.0, 0.0);
        if !(v.re.is_finite() && v.im.is_finite()) || v == c(0.0, 0.0) {
            return Err(NyquistError::UndeclaredSingularity { omega });
        }
        Ok(v)
    }

    fn step(
        &mut self,
        w1: f64,
        g1: C64,
        w2: f64,
        g2: C64,
        depth: u32,
        out: &mut Vec<(f64, C64)>,
    ) -> Result<f64, NyquistError> {
        let d = cdiv(g2, g1).arg();
        let wm = 0.5 * (w1 + w2);
        if depth >= self.opts.max_depth || w2 - w1 < 1e-10 * wm.abs().max(1.0) {
            return Err(NyquistError::UndeclaredSingularity { omega: wm });
        }
        let gm = self.g(wm)?;
        let d1 = cdiv(gm, g1).arg();
        let d2 = cdiv(g2, gm).arg();
        if d.abs() < FRAC_PI_4 && (d1 + d2 - d).abs() < 1e-6 {
            out.push((wm, gm));
            out.push((w2, g2));
            return Ok(d1 + d2);
        }
        let a = self.step(w1, g1, wm, gm, depth + 1, out)?;
        let b = self.step(wm, gm, w2, g2, depth + 1, out)?;
        Ok(a + b)
    }

    fn segment(&mut self, a: f64, b: f64, eps: f64) -> Result<(f64, Vec<(f64, C64)>), NyquistError> {
        let half = 0.5 * (b - a);
        let floor = (0.5 * eps).max(half * 1e-12);
        let ratio = libm::pow(10.0, -1.0 / self.opts.per_decade as f64);
        let mut offs = Vec::new();
        let mut r = half;
        while r >= floor {
            offs.push(r);
            r *= ratio;
        }
        let mut nodes: Vec<f64> = Vec::with_capacity(2 * offs.len() + 2);
        nodes.push(a);
        nodes.extend(offs.iter().rev().map(|o| a + o));
        nodes.extend(offs.iter().skip(1).map(|o| b - o));
        nodes.push(b);
        nodes.dedup_by(|x, y| *x <= *y);
        let mut dense = Vec::with_capacity(nodes.len());
        for w in nodes.windows(2) {
            dense.push(w[0]);
            let gap = MAX_REL_STEP * w[0].abs().min(w[1].abs()).max(1.0);
            let n = libm::ceil((w[1] - w[0]) / gap) as usize;
            for k in 1..n {
                dense.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
            }
        }
        dense.push(b);
        let nodes = dense;

        let mut pts = Vec::with_capacity(nodes.len() * 2);
        let mut prev = (nodes[0], self.g(nodes[0])?);
        pts.push(prev);
        let mut delta = 0.0;
        for &w in &nodes[1..] {
            let gw = self.g(w)?;
            delta += self.step(prev.0, prev.1, w, gw, 0, &mut pts)?;
            prev = (w, gw);
        }
        Ok((delta, pts))
    }
}

fn sweep_once(
    tracer: &mut Tracer<'_>,
    punctures: &[Puncture],
    omega_max: f64,
    eps: f64,
) -> Result<(Vec<Segment>, f64), NyquistError> {
    let mut bounds: Vec<(f64, Option<&Puncture>)> = Vec::new();
    bounds.push((-omega_max, None));
    for p in punctures {
        bounds.push((p.omega, Some(p)));
    }
    bounds.push((omega_max, None));

    let mut segments = Vec::new();
    let mut total = 0.0;
    for w in bounds.windows(2) {
        let (a, pa) = w[0];
        let (b, pb) = w[1];
        let start = if pa.is_some() { a + eps } else { a };
        let end = if pb.is_some() { b - eps } else { b };
        let (delta, points) = tracer.segment(start, end, eps)?;
        let g_start = points[0].1;
        let g_end = points[points.len() - 1].1;
        total += delta;

        let start_limit = match pa {
            None => EndpointLimit::Infinity,
            Some(p) => p.limit_phase(1.0).map_or(EndpointLimit::Unknown, EndpointLimit::Phase),
        };
        let end_limit = match pb {
            None => EndpointLimit::Infinity,
            Some(p) => p.limit_phase(-1.0).map_or(EndpointLimit::Unknown, EndpointLimit::Phase),
        };
        let into_start = match start_limit {
            EndpointLimit::Infinity => {
                total += g_start.arg();
                Some(g_start.arg())
            }
            EndpointLimit::Phase(ph) => Some(wrap_angle(g_start.arg() - ph)),
            EndpointLimit::Unknown => None,
        };
        let into_end = match end_limit {
            EndpointLimit::Infinity => {
                total -= g_end.arg();
                Some(-g_end.arg())
            }
            EndpointLimit::Phase(ph) => Some(wrap_angle(ph - g_end.arg())),
            EndpointLimit::Unknown => None,
        };
        let limit_delta = match (into_start, into_end) {
            (Some(x), Some(y)) => Some(delta + x + y),
            _ => None,
        };
        segments.push(Segment { start, end, points, delta, start_limit, end_limit, limit_delta });
    }
    Ok((segments, total))
}

/// Argument change of `1 + F_o(jω)` over `[-Ω, Ω]` with `(ω_i - ε, ω_i + ε)`
/// removed around every puncture, closed at `±∞` by the decay of `F_o`,
/// and extrapolated over `ε`, `ε/2`, `ε/4`.
pub fn sweep_argument(
    f: &TransferExpr,
    punctures: &[Puncture],
    omega_max: f64,
    eps: f64,
    opts: &SweepOptions,
) -> Result<NyquistSweep, NyquistError> {
    let mut ps: Vec<Puncture> = punctures.to_vec();
    ps.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap_or(core::cmp::Ordering::Equal));
    ps.dedup_by(|a, b| (a.omega - b.omega).abs() < 1e-12);
    let wmax = ps.iter().map(|p| p.omega.abs()).fold(0.0, f64::max);
    if !(eps > 0.0) {
        return Err(NyquistError::BadPunctures("ε must be positive".into()));
    }
    for w in ps.windows(2) {
        if 2.0 * eps >= w[1].omega - w[0].omega {
            return Err(NyquistError::BadPunctures(format!(
                "ε = {} is not below half the spacing of punctures at {} and {}",
                eps, w[0].omega, w[1].omega
            )));
        }
    }
    if !(omega_max >= 10.0 * wmax) || !omega_max.is_finite() {
        return Err(NyquistError::BadPunctures(format!(
            "Ω = {} must be at least ten times the largest puncture {}",
            omega_max, wmax
        )));
    }

    let mut notes = Vec::new();
    let mut omega = omega_max;
    let tail = |w: f64| -> Result<f64, NyquistError> {
        Ok(abs(eval_nudged(f, w)?).max(abs(eval_nudged(f, -w)?)))
    };
    let mut mag = tail(omega)?;
    if opts.grow_omega {
        let mut n = 0;
        while mag > opts.tail_tol && n < 30 {
            omega *= 2.0;
            mag = tail(omega)?;
            n += 1;
        }
        if omega != omega_max {
            notes.push(format!("Ω raised from {} to {} to bound the tail", omega_max, omega));
        }
    }
    if mag > opts.tail_tol {
        return Err(NyquistError::OmegaTooSmall { omega, magnitude: mag });
    }
    let tail_bound = libm::asin(mag.min(1.0));

    let mut tracer = Tracer { f, opts: *opts, evaluations: 0 };
    let (segments, t0) = sweep_once(&mut tracer, &ps, omega, eps)?;
    let (_, t1) = sweep_once(&mut tracer, &ps, omega, 0.5 * eps)?;
    let (_, t2) = sweep_once(&mut tracer, &ps, omega, 0.25 * eps)?;
    let total = if ps.is_empty() { t2 } else { aitken(t0, t1, t2) };
    let residual = (total - t2).abs();
    if (t1 - t2).abs() >= 1e-3 {
        notes.push(format!("totals still move by {:e} between ε/2 and ε/4", (t1 - t2).abs()));
    }

    let limit_total = segments.iter().map(|s| s.limit_delta).sum::<Option<f64>>();
    if let Some(l) = limit_total {
        if (l - total).abs() > 1e-3 {
            notes.push(format!(
                "limit-based total {} differs from the extrapolated total {} by {:e}",
                l,
                total,
                (l - total).abs()
            ));
        }
    }
    Ok(NyquistSweep {
        segments,
        total_delta: total,
        limit_total,
        raw_totals: [t0, t1, t2],
        extrapolation_residual: residual,
        punctures: ps,
        eps,
        omega_max: omega,
        tail_bound,
        evaluations: tracer.evaluations,
        notes,
    })
}

/// A zero of `1 + F_o` on the imaginary axis, i.e. a closed-loop pole.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisZero {
    pub omega: f64,
    pub multiplicity: u32,
    /// Dominant term `c (s - jω)^m` of `1 + F_o`.
    pub leading: Term,
    /// `|1 + F_o(jω)|` at the located point.
    pub residual: f64,
}

impl AxisZero {
    /// The open-loop expansion `-1 + c (s - jω)^m` at the zero.
    pub fn open_loop_expansion(&self) -> AsymExpansion {
        let loc = c(0.0, self.omega);
        let terms = alloc::vec![Term::new(Exponent::ZERO, c(-1.0, 0.0)), self.leading];
        AsymExpansion::new(loc, terms, self.leading.kappa + Exponent::ONE)
            .expect("terms are sorted and nonzero")
            .with_estimated(true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisZeroOptions {
    pub omega_max: f64,
    pub omega_min: f64,
    pub per_decade: usize,
    /// Grid points closer than this (relative) to an excluded point are
    /// skipped.
    pub exclude_radius: f64,
}

impl AxisZeroOptions {
    pub fn with_omega_max(omega_max: f64) -> Self {
        AxisZeroOptions { omega_max, omega_min: 1e-4, per_decade: 200, exclude_radius: 1e-6 }
    }
}

impl Default for AxisZeroOptions {
    fn default() -> Self {
        Self::with_omega_max(100.0)
    }
}

fn golden_min(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs().max(b.abs()).max(1e-300)) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = g(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Zeros of `1 + F_o(jω)` for `|ω| ≤ Ω` away from `exclude`, by a scan of
/// `|1 + F_o|` for local minima, golden-section refinement, and a local
/// power-law fit for the multiplicity.
pub fn locate_axis_zeros(
    f: &TransferExpr,
    exclude: &[f64],
    opts: &AxisZeroOptions,
) -> Result<Vec<AxisZero>, NyquistError> {
    let excluded = |w: f64| exclude.iter().any(|e| (w - e).abs() <= opts.exclude_radius * e.abs().max(1.0));
    let ratio = libm::pow(10.0, 1.0 / opts.per_decade as f64);
    let mut pos = Vec::new();
    let mut w = opts.omega_min;
    while w < opts.omega_max {
        pos.push(w);
        w *= ratio;
    }
    pos.push(opts.omega_max);
    let mut grid: Vec<f64> = pos.iter().rev().map(|w| -w).collect();
    grid.push(0.0);
    grid.extend(pos.iter().copied());

    let g = |w: f64| -> f64 {
        match eval_axis(f, w) {
            Ok(v) => abs(v + c(1.0, 0.0)),
            Err(_) => f64::INFINITY,
        }
    };
    let vals: Vec<f64> = grid.iter().map(|w| if excluded(*w) { f64::INFINITY } else { g(*w) }).collect();

    let mut out: Vec<AxisZero> = Vec::new();
    for i in 1..grid.len() - 1 {
        if !(vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1]) || !vals[i].is_finite() {
            continue;
        }
        let w0 = golden_min(&g, grid[i - 1], grid[i + 1]);
        if excluded(w0) {
            continue;
        }
        let r0 = g(w0);
        let h0 = 1e-3 * w0.abs().max(1.0);
        let hs = [h0, h0 / 2.0, h0 / 4.0, h0 / 8.0];
        let ls: Vec<f64> = hs.iter().map(|h| 0.5 * (libm::log(g(w0 + h)) + libm::log(g(w0 - h)))).collect();
        let slope = (ls[0] - ls[3]) / libm::log(8.0);
        let m = libm::round(slope);
        let smallest = libm::exp(ls[3]);
        if !(m >= 1.0) || (slope - m).abs() > 0.2 || !(r0 < 1e-6 * smallest) {
            continue;
        }
        let h = hs[3];
        let gp = eval_axis(f, w0 + h).map_err(|_| NyquistError::UndeclaredSingularity { omega: w0 })? + c(1.0, 0.0);
        let coeff = cdiv(gp, crate::util::cpow(c(0.0, h), m));
        if out.iter().any(|z| (z.omega - w0).abs() < 1e-8 * w0.abs().max(1.0)) {
            continue;
        }
        out.push(AxisZero {
            omega: w0,
            multiplicity: m as u32,
            leading: Term::new(Exponent::int(m as i64), coeff),
            residual: r0,
        });
    }
    Ok(out)
}

/// Argument increase of `1 + F_o` along a vanishing right semicircle around
/// an open-loop point on the axis.
pub fn semicircle_increment(record: &SingularityRecord) -> Result<f64, NyquistError> {
    let terms = record.expansion.terms();
    let lead = terms.first().ok_or_else(|| NyquistError::Expansion("empty expansion".into()))?;
    if lead.kappa.is_negative() {
        return Ok(lead.kappa.to_f64() * PI);
    }
    if record.is_minus_one_point() {
        let next = terms.get(1).ok_or_else(|| {
            NyquistError::Expansion(format!(
                "expansion at ({}, {}) tends to -1 but has no second term",
                record.location.re, record.location.im
            ))
        })?;
        return Ok(next.kappa.to_f64() * PI);
    }
    Ok(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemicircleCheck {
    /// Extrapolated to `ϱ → 0`.
    pub value: f64,
    /// Values at `ϱ`, `ϱ/2`, `ϱ/4`.
    pub raw: [f64; 3],
}

/// Imaginary part of `∫ F'/(1 + F) ds` along `s = a + ϱ e^{jφ}`,
/// `φ ∈ [-π/2, π/2]`, extrapolated over `ϱ`, `ϱ/2`, `ϱ/4`.
pub fn verify_semicircle_numeric(f: &TransferExpr, at: C64, rho: f64) -> Result<SemicircleCheck, NyquistError> {
    let df = f.derivative();
    let q = Adaptive::new(1e-12, 1e-10, 40);
    let one = |r: f64| -> Result<f64, NyquistError> {
        let mut integrand = |phi: f64| -> Result<C64, NyquistError> {
            let e = c(libm::cos(phi), libm::sin(phi)) * r;
            let s = at + e;
            let fv = f.eval(s).map_err(|_| NyquistError::Quadrature { rho: r })?;
            let dv = df.eval(s).map_err(|_| NyquistError::Quadrature { rho: r })?;
            Ok(cdiv(dv, fv + c(1.0, 0.0)) * c(0.0, 1.0) * e)
        };
        let res = q.integrate(&mut integrand, -FRAC_PI_2, FRAC_PI_2)?;
        if !res.converged || !res.value.im.is_finite() {
            return Err(NyquistError::Quadrature { rho: r });
        }
        Ok(res.value.im)
    };
    let raw = [one(rho)?, one(0.5 * rho)?, one(0.25 * rho)?];
    Ok(SemicircleCheck { value: aitken(raw[0], raw[1], raw[2]), raw })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    /// `P_{cl,+}` solved from the residual; near a nonnegative integer when
    /// consistent.
    pub p_cl_plus: f64,
    pub p_cl_j: u32,
    pub b_cl_j: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NyquistVerdict {
    pub measured: f64,
    pub required: f64,
    pub stable: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub decomposition: Decomposition,
    pub axis_zeros: Vec<AxisZero>,
    pub sweep: NyquistSweep,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NyquistOptions {
    pub omega_max: Option<f64>,
    pub eps: Option<f64>,
    pub tol: f64,
    pub sweep: SweepOptions,
    pub axis_zeros: Option<AxisZeroOptions>,
}

impl Default for NyquistOptions {
    fn default() -> Self {
        NyquistOptions { omega_max: None, eps: None, tol: 0.05, sweep: SweepOptions::default(), axis_zeros: None }
    }
}

/// Punctures for every open-loop point on the axis plus every zero of
/// `1 + F_o` found there.
pub fn punctures_for(inv: &Inventory, zeros: &[AxisZero]) -> Vec<Puncture> {
    let mut ps: Vec<Puncture> =
        inv.axis.iter().filter(|r| r.on_imaginary_axis()).map(Puncture::from_record).collect();
    ps.extend(zeros.iter().map(Puncture::from_zero));
    ps.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap_or(core::cmp::Ordering::Equal));
    ps
}

pub fn nyquist_verdict(f: &TransferExpr, inv: &Inventory, opts: &NyquistOptions) -> Result<NyquistVerdict, NyquistError> {
    let open_axis: Vec<f64> = inv.axis.iter().filter(|r| r.on_imaginary_axis()).map(|r| r.location.im).collect();
    let base: Vec<Puncture> = punctures_for(inv, &[]);
    let omega_max = opts.omega_max.unwrap_or_else(|| default_omega_max(&base));
    let zopts = opts.axis_zeros.unwrap_or_else(|| AxisZeroOptions::with_omega_max(omega_max));
    let zeros = locate_axis_zeros(f, &open_axis, &zopts)?;
    let ps = punctures_for(inv, &zeros);
    let eps = opts.eps.unwrap_or_else(|| default_eps(&ps));
    let omega_max = opts.omega_max.unwrap_or_else(|| default_omega_max(&ps));
    let sweep = sweep_argument(f, &ps, omega_max, eps, &opts.sweep)?;

    let b_o = branch_number(&inv.axis, Role::OpenLoop).map_err(|e| NyquistError::Expansion(format!("{}", e)))?;
    let required = PI * (2.0 * inv.rhp_poles as f64 + inv.axis_pole_order() as f64 + b_o);
    let measured = sweep.total_delta;
    let residual = measured - required;
    let stable = residual.abs() < opts.tol;

    let p_cl_j: u32 = zeros.iter().map(|z| z.multiplicity).sum();
    let b_cl_j = branch_number(&inv.axis, Role::ClosedLoop).map_err(|e| NyquistError::Expansion(format!("{}", e)))?;
    let p_cl_plus = 0.5 * (-residual / PI - p_cl_j as f64 - b_cl_j);
    let nearest = libm::round(p_cl_plus);
    let consistent = nearest >= 0.0 && (p_cl_plus - nearest).abs() * 2.0 * PI < opts.tol;
    Ok(NyquistVerdict {
        measured,
        required,
        stable,
        residual,
        tolerance: opts.tol,
        decomposition: Decomposition { p_cl_plus, p_cl_j, b_cl_j, consistent },
        axis_zeros: zeros,
        sweep,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NyquistTable {
    /// `(ω, Re F_o(jω), Im F_o(jω))`.
    pub rows: Vec<(f64, f64, f64)>,
    pub skipped: Vec<(f64, String)>,
}

pub fn export_nyquist_data(f: &TransferExpr, grid: &[f64]) -> NyquistTable {
    let mut rows = Vec::with_capacity(grid.len());
    let mut skipped = Vec::new();
    for &w in grid {
        match eval_axis(f, w) {
            Ok(v) => rows.push((w, v.re, v.im)),
            Err(e) => skipped.push((w, format!("{}", e))),
        }
    }
    NyquistTable { rows, skipped }
}
