//! Argument-principle counting on rectangles.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::expr::{EvalError, TransferExpr};
use crate::util::{abs, c, cdiv};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    /// `[margin, radius] × [-radius, radius]`: the right half-plane, kept off
    /// the imaginary axis where branch points live.
    pub fn right_half_plane(margin: f64, radius: f64) -> Self {
        Rect { re_min: margin, re_max: radius, im_min: -radius, im_max: radius }
    }

    fn corners(&self) -> [C64; 4] {
        [
            c(self.re_min, self.im_min),
            c(self.re_max, self.im_min),
            c(self.re_max, self.im_max),
            c(self.re_min, self.im_max),
        ]
    }

    fn nudged(&self, k: u32) -> Rect {
        let f = k as f64;
        Rect {
            re_min: self.re_min * (1.0 + 0.31 * f),
            re_max: self.re_max * (1.0 + 0.013 * f),
            im_min: self.im_min * (1.0 + 0.017 * f),
            im_max: self.im_max * (1.0 + 0.019 * f),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingOptions {
    pub initial_per_edge: usize,
    pub max_depth: u32,
    /// Largest distance of the raw winding from an integer still accepted.
    pub snap_tol: f64,
    pub max_retries: u32,
}

impl Default for WindingOptions {
    fn default() -> Self {
        WindingOptions { initial_per_edge: 64, max_depth: 40, snap_tol: 0.05, max_retries: 5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Winding {
    pub count: i64,
    /// Total phase change divided by 2π before rounding.
    pub raw: f64,
    pub evaluations: usize,
    pub retries: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WindingError {
    SingularityOnContour { at: C64 },
    Inconclusive { raw: f64 },
}

impl fmt::Display for WindingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindingError::SingularityOnContour { at } => {
                write!(f, "singularity on contour near ({}, {})", at.re, at.im)
            }
            WindingError::Inconclusive { raw } => write!(f, "inconclusive winding number {:.4}", raw),
        }
    }
}

/// Winding number of `f` around 0 along the boundary of `rect`, traversed
/// counter-clockwise; equals zeros minus poles of `f` inside.
pub fn winding_number<F>(f: &F, rect: Rect, opts: &WindingOptions) -> Result<Winding, WindingError>
where
    F: Fn(C64) -> Result<C64, EvalError>,
{
    let mut last_err = None;
    for k in 0..=opts.max_retries {
        let r = if k == 0 { rect } else { rect.nudged(k) };
        match contour_phase(f, &r, opts) {
            Ok((phase, evals)) => {
                let raw = phase / (2.0 * PI);
                let count = libm::round(raw);
                if (raw - count).abs() > opts.snap_tol {
                    return Err(WindingError::Inconclusive { raw });
                }
                return Ok(Winding { count: count as i64, raw, evaluations: evals, retries: k });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap())
}

pub fn winding_number_expr(f: &TransferExpr, rect: Rect, opts: &WindingOptions) -> Result<Winding, WindingError> {
    winding_number(&|s| f.eval(s), rect, opts)
}

fn contour_phase<F>(f: &F, rect: &Rect, opts: &WindingOptions) -> Result<(f64, usize), WindingError>
where
    F: Fn(C64) -> Result<C64, EvalError>,
{
    let corners = rect.corners();
    let mut total = 0.0;
    let mut evals = 0usize;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let n = opts.initial_per_edge.max(2);
        let pts: Vec<C64> = (0..=n).map(|i| a + (b - a) * (i as f64 / n as f64)).collect();
        let mut vals = Vec::with_capacity(pts.len());
        for z in &pts {
            vals.push(value(f, *z)?);
            evals += 1;
        }
        for i in 0..n {
            total += segment(f, pts[i], pts[i + 1], vals[i], vals[i + 1], 0, opts.max_depth, &mut evals)?;
        }
    }
    Ok((total, evals))
}

fn value<F>(f: &F, z: C64) -> Result<C64, WindingError>
where
    F: Fn(C64) -> Result<C64, EvalError>,
{
    match f(z) {
        Ok(v) if abs(v) > 0.0 => Ok(v),
        _ => Err(WindingError::SingularityOnContour { at: z }),
    }
}

fn arg_ratio(b: C64, a: C64) -> f64 {
    cdiv(b, a).arg()
}

#[allow(clippy::too_many_arguments)]
fn segment<F>(
    f: &F,
    za: C64,
    zb: C64,
    fa: C64,
    fb: C64,
    depth: u32,
    max_depth: u32,
    evals: &mut usize,
) -> Result<f64, WindingError>
where
    F: Fn(C64) -> Result<C64, EvalError>,
{
    let d = arg_ratio(fb, fa);
    let zm = (za + zb) * 0.5;
    let fm = value(f, zm)?;
    *evals += 1;
    let d1 = arg_ratio(fm, fa);
    let d2 = arg_ratio(fb, fm);
    let limit = PI / 4.0;
    // log|f| must also interpolate linearly, or the phase may have turned
    // unseen between samples.
    let bend = libm::log(abs(fm)) - 0.5 * (libm::log(abs(fa)) + libm::log(abs(fb)));
    if d.abs() < limit && d1.abs() < limit && d2.abs() < limit && (d1 + d2 - d).abs() < 1e-9 && bend.abs() < 0.5 {
        return Ok(d);
    }
    if depth >= max_depth {
        return Err(WindingError::SingularityOnContour { at: zm });
    }
    Ok(segment(f, za, zm, fa, fm, depth + 1, max_depth, evals)?
        + segment(f, zm, zb, fm, fb, depth + 1, max_depth, evals)?)
}
