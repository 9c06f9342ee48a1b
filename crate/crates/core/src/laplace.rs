//! Numerical inverse Laplace transform along the Bromwich line.
//!
//! `f(t) = e^{at}/(2π) ∫ F(a + jy) e^{jyt} dy` with `a = a_0 + min(1, 1/t)`.
//! The part `K/(s + 1)` of the large-`|s|` behaviour `F ≈ K/s` is split off
//! and inverted exactly (`K e^{-t}`), the rest is integrated with
//! Gauss–Legendre panels over `[0, Y]`, and the tail beyond `Y` is closed
//! with three terms of repeated integration by parts. `Y` is `Ω_q` clamped
//! to `[100/t, 1000/t]`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::Cell;
use core::f64::consts::PI;
use core::fmt;

use crate::expr::{EvalError, TransferExpr};
use crate::quad::Adaptive;
use crate::stability::SampledSignal;
use crate::util::{abs, aitken_c, c};
use crate::C64;

pub use crate::stability::{fit_tail_exponent, TailFit, TailFitError, TailShape};

#[derive(Clone, Debug, PartialEq)]
pub struct InversionConfig {
    /// Fixed abscissa; when `None` it is scheduled per sample.
    pub abscissa: Option<f64>,
    /// Real part of the rightmost singularity (0 for stable inputs); the
    /// scheduled abscissa is this plus `min(1, 1/t)`.
    pub min_abscissa: f64,
    /// `Ω_q` is the first `y` (doubling from 1) with
    /// `|F(a + jy)| < q_tol |F(a)|`.
    pub q_tol: f64,
    pub omega_q_max: f64,
    /// Evaluations of `F` allowed per sample.
    pub node_budget: usize,
    /// Samples whose estimated relative error exceeds this are flagged.
    pub flag_tol: f64,
    /// Samples beyond this time are flagged as outside the reliable range.
    pub horizon: f64,
    pub times: Vec<f64>,
}

impl InversionConfig {
    pub fn new(times: Vec<f64>) -> Self {
        InversionConfig {
            abscissa: None,
            min_abscissa: 0.0,
            q_tol: 1e-3,
            omega_q_max: 1e5,
            node_budget: 4_000_000,
            flag_tol: 1e-3,
            horizon: 1e4,
            times,
        }
    }

    pub fn abscissa_at(&self, t: f64) -> f64 {
        self.abscissa.unwrap_or(self.min_abscissa + (1.0f64).min(1.0 / t))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvertedSample {
    pub t: f64,
    /// `None` when `F` could not be evaluated on the line.
    pub value: Option<C64>,
    /// Estimated absolute error.
    pub error: f64,
    pub flagged: bool,
    pub abscissa: f64,
    pub omega_q: f64,
    pub evaluations: usize,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inversion {
    pub samples: Vec<InvertedSample>,
    /// `K` in `F ≈ K/s` for large `|s|`, when it could be estimated.
    pub k: Option<C64>,
    pub real_symmetric: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InversionError {
    EmptyGrid,
    InvalidTime(f64),
    InvalidAbscissa(f64),
    NoSamples,
}

impl fmt::Display for InversionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InversionError::EmptyGrid => f.write_str("empty time grid"),
            InversionError::InvalidTime(t) => write!(f, "time {} is not positive and finite", t),
            InversionError::InvalidAbscissa(a) => write!(f, "abscissa {} is not right of the singularities", a),
            InversionError::NoSamples => f.write_str("every sample was flagged"),
        }
    }
}

impl Inversion {
    /// Unflagged samples as a signal.
    pub fn signal(&self) -> Result<SampledSignal, InversionError> {
        let (t, v): (Vec<f64>, Vec<C64>) =
            self.samples.iter().filter(|s| !s.flagged).filter_map(|s| s.value.map(|v| (s.t, v))).unzip();
        if t.is_empty() {
            return Err(InversionError::NoSamples);
        }
        SampledSignal::new(t, v).map_err(|_| InversionError::NoSamples)
    }

    /// Every sample that has a value, flagged or not.
    pub fn signal_all(&self) -> Result<SampledSignal, InversionError> {
        let (t, v): (Vec<f64>, Vec<C64>) = self.samples.iter().filter_map(|s| s.value.map(|v| (s.t, v))).unzip();
        if t.is_empty() {
            return Err(InversionError::NoSamples);
        }
        SampledSignal::new(t, v).map_err(|_| InversionError::NoSamples)
    }

    pub fn flagged_count(&self) -> usize {
        self.samples.iter().filter(|s| s.flagged).count()
    }
}

/// `lim s F(s)` along the positive real axis, if it settles.
pub fn estimate_k(f: &TransferExpr) -> Option<C64> {
    let mut v = [c(0.0, 0.0); 4];
    for (i, r) in [1e4, 1e5, 1e6, 1e7].iter().enumerate() {
        v[i] = f.eval(c(*r, 0.0)).ok()? * *r;
    }
    let k = aitken_c(v[1], v[2], v[3]);
    let scale = abs(k).max(1e-300);
    if abs(v[3] - v[2]) > 1e-2 * scale.max(1e-8) || !(k.re.is_finite() && k.im.is_finite()) {
        return None;
    }
    if abs(k) < 1e-12 * abs(v[0]).max(1e-300) || abs(k) < 1e-14 {
        return None;
    }
    Some(k)
}

fn is_real_symmetric(f: &TransferExpr) -> bool {
    [c(0.7, 1.3), c(2.1, 0.4), c(0.3, 5.0), c(1.0, 0.0)].iter().all(|s| {
        match (f.eval(*s), f.eval(s.conj())) {
            (Ok(a), Ok(b)) => abs(a.conj() - b) <= 1e-12 * abs(a).max(1e-300),
            _ => false,
        }
    })
}

struct Kernel<'a> {
    g: &'a TransferExpr,
    dg: &'a TransferExpr,
    ddg: &'a TransferExpr,
    k: C64,
    evals: Cell<usize>,
}

impl<'a> Kernel<'a> {
    /// `F(s) - K/(s + 1)` and its first two derivatives.
    fn eval(&self, s: C64, order: u32) -> Result<C64, EvalError> {
        self.evals.set(self.evals.get() + 1);
        let one = s + c(1.0, 0.0);
        Ok(match order {
            0 => self.g.eval(s)? - self.k / one,
            1 => self.dg.eval(s)? + self.k / (one * one),
            _ => self.ddg.eval(s)? - self.k * 2.0 / (one * one * one),
        })
    }
}

/// `∫_0^∞ G(a + jσy) e^{jσyt} dy` and an error estimate.
fn half_line(kern: &Kernel<'_>, a: f64, t: f64, sigma: f64, y_end: f64, budget: usize) -> Result<(C64, f64, bool), EvalError> {
    let period = PI / t;
    let mut bounds = alloc::vec![0.0];
    let mut h = a.min(period) / 4.0;
    while h < period {
        bounds.push(h);
        h *= 2.0;
    }
    let mut y = period;
    while y < y_end {
        bounds.push(y);
        y += period;
    }
    bounds.push(y);

    let q = Adaptive::new(1e-15, 1e-12, 20);
    let mut acc = c(0.0, 0.0);
    let mut err = 0.0;
    let mut converged = true;
    for w in bounds.windows(2) {
        if kern.evals.get() > budget {
            return Ok((acc, f64::INFINITY, false));
        }
        let mut integrand = |y: f64| -> Result<C64, EvalError> {
            let s = c(a, sigma * y);
            let ph = sigma * y * t;
            Ok(kern.eval(s, 0)? * c(libm::cos(ph), libm::sin(ph)))
        };
        let r = q.integrate(&mut integrand, w[0], w[1])?;
        acc += r.value;
        err += r.error;
        converged &= r.converged;
    }

    let y_top = *bounds.last().unwrap();
    let s = c(a, sigma * y_top);
    let u0 = kern.eval(s, 0)?;
    let u1 = kern.eval(s, 1)? * c(0.0, sigma);
    let u2 = -kern.eval(s, 2)?;
    let lam = c(0.0, sigma * t);
    let ph = sigma * y_top * t;
    let e = c(libm::cos(ph), libm::sin(ph));
    let tail = -e * (u0 / lam - u1 / (lam * lam) + u2 / (lam * lam * lam));
    err += abs(u2 / (lam * lam * lam));
    Ok((acc + tail, err, converged))
}

fn omega_q(kern: &Kernel<'_>, a: f64, cfg: &InversionConfig) -> f64 {
    let base = match kern.eval(c(a, 0.0), 0) {
        Ok(v) => abs(v),
        Err(_) => return cfg.omega_q_max,
    };
    let mut y: f64 = 1.0;
    while y < cfg.omega_q_max {
        let v = kern.eval(c(a, y), 0).map(abs).unwrap_or(f64::INFINITY);
        let w = kern.eval(c(a, -y), 0).map(abs).unwrap_or(f64::INFINITY);
        if v.max(w) < cfg.q_tol * base {
            return y;
        }
        y *= 2.0;
    }
    cfg.omega_q_max
}

pub fn invert(f: &TransferExpr, cfg: &InversionConfig) -> Result<Inversion, InversionError> {
    if cfg.times.is_empty() {
        return Err(InversionError::EmptyGrid);
    }
    if let Some(t) = cfg.times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(InversionError::InvalidTime(*t));
    }
    if let Some(a) = cfg.abscissa {
        if !(a > cfg.min_abscissa) {
            return Err(InversionError::InvalidAbscissa(a));
        }
    }
    let mut notes = Vec::new();
    let k = estimate_k(f);
    match k {
        Some(k) => notes.push(format!("F ≈ K/s at large |s| with K = {}{:+}j; K e^(-t) split off", k.re, k.im)),
        None => notes.push("no K/s behaviour resolved at large |s|; nothing split off".into()),
    }
    let real_symmetric = is_real_symmetric(f);
    let dg = f.derivative();
    let ddg = dg.derivative();
    let kern = Kernel { g: f, dg: &dg, ddg: &ddg, k: k.unwrap_or(c(0.0, 0.0)), evals: Cell::new(0) };

    let mut samples = Vec::with_capacity(cfg.times.len());
    for &t in &cfg.times {
        kern.evals.set(0);
        let a = cfg.abscissa_at(t);
        let oq = omega_q(&kern, a, cfg);
        let y_end = oq.clamp(100.0 / t, 1000.0 / t);
        let halves = if real_symmetric {
            half_line(&kern, a, t, 1.0, y_end, cfg.node_budget).map(|(v, e, ok)| (c(2.0 * v.re, 0.0), 2.0 * e, ok))
        } else {
            half_line(&kern, a, t, 1.0, y_end, cfg.node_budget).and_then(|(v1, e1, ok1)| {
                half_line(&kern, a, t, -1.0, y_end, cfg.node_budget).map(|(v2, e2, ok2)| (v1 + v2, e1 + e2, ok1 && ok2))
            })
        };
        let scale = libm::exp(a * t) / (2.0 * PI);
        let mut sample = InvertedSample {
            t,
            value: None,
            error: f64::INFINITY,
            flagged: true,
            abscissa: a,
            omega_q: oq,
            evaluations: kern.evals.get(),
            note: None,
        };
        match halves {
            Ok((v, e, ok)) => {
                let value = v * scale + kern.k * libm::exp(-t);
                sample.value = Some(value);
                sample.error = e * scale;
                sample.flagged = !ok;
                if !ok {
                    sample.note = Some("quadrature did not converge within the node budget".into());
                }
            }
            Err(e) => sample.note = Some(format!("F not evaluable on the line: {}", e)),
        }
        if t > cfg.horizon {
            sample.flagged = true;
            sample.note.get_or_insert_with(|| "beyond the reliable horizon".into());
        }
        samples.push(sample);
    }

    let peak = samples.iter().filter_map(|s| s.value.map(abs)).fold(0.0, f64::max);
    for s in samples.iter_mut() {
        if let Some(v) = s.value {
            let reference = abs(v).max(1e-6 * peak);
            if s.error > cfg.flag_tol * reference {
                s.flagged = true;
                s.note.get_or_insert_with(|| format!("relative error estimate {:e} too large", s.error / reference));
            }
        }
    }
    Ok(Inversion { samples, k, real_symmetric, notes })
}
