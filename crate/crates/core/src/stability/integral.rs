//! Numerical estimates of the step-response, BIBO and β-exponential
//! integrals of a sampled impulse response, with tail extrapolation from
//! the last decade of samples.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::signal::SampledSignal;
use super::tail::{fit_tail_exponent, TailFit, TailShape};
use crate::util::{abs, c, linear_fit};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convergence {
    Convergent,
    Divergent,
    Inconclusive,
}

impl Convergence {
    pub fn name(self) -> &'static str {
        match self {
            Convergence::Convergent => "convergent",
            Convergence::Divergent => "divergent",
            Convergence::Inconclusive => "inconclusive",
        }
    }
}

/// Power-law tails with `p` above `1 + P_BAND` converge, below `1 - P_BAND`
/// diverge; in between the growth of `∫|g|` per decade decides.
pub const P_BAND: f64 = 0.05;
/// Ratio of consecutive decade increments of `∫|g|` at or above which the
/// integral is taken to grow logarithmically (or faster).
pub const LOG_GROWTH_RATIO: f64 = 0.97;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralTests {
    /// `∫ g` finite.
    pub sr: Convergence,
    /// `∫ |g|` finite.
    pub bibo: Convergence,
    /// `∫ |g| e^{-β₁ t}` finite with `β₁ = β - 0.1`, and `g` bounded.
    pub beta_exp: Convergence,
    pub beta: f64,
    /// `∫ g` over the grid plus head and tail corrections.
    pub integral: C64,
    pub abs_integral: f64,
    pub weighted_integral: Option<f64>,
    pub bounded: bool,
    pub max_abs: f64,
    pub tail: Option<TailFit>,
    /// Ratio of the last two decade increments of `∫|g|`.
    pub decade_ratio: Option<f64>,
    /// `(M, a)` with `|g(t)| ≤ M e^{-a t}` on the samples, when `beta_exp`
    /// converges.
    pub envelope: Option<(f64, f64)>,
    pub notes: Vec<String>,
}

/// Composite quadrature on the sample grid: Simpson on consecutive pairs of
/// intervals, trapezoid for a leftover interval. Returns the cumulative
/// integral at every node (interior nodes of a pair by trapezoid).
fn cumulative<T>(t: &[f64], y: &[T], zero: T) -> Vec<T>
where
    T: Copy + core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T>,
{
    let n = t.len();
    let mut out = alloc::vec![zero; n];
    let mut i = 0;
    while i + 2 < n {
        let (h0, h1) = (t[i + 1] - t[i], t[i + 2] - t[i + 1]);
        let s = h0 + h1;
        let w0 = s / 6.0 * (2.0 - h1 / h0);
        let w1 = s / 6.0 * (s * s / (h0 * h1));
        let w2 = s / 6.0 * (2.0 - h0 / h1);
        out[i + 1] = out[i] + (y[i] + y[i + 1]) * (0.5 * h0);
        out[i + 2] = out[i] + y[i] * w0 + y[i + 1] * w1 + y[i + 2] * w2;
        i += 2;
    }
    if i + 1 < n {
        out[i + 1] = out[i] + (y[i] + y[i + 1]) * (0.5 * (t[i + 1] - t[i]));
    }
    out
}

fn sign_changes(v: impl Iterator<Item = f64>) -> usize {
    let mut prev = 0.0f64;
    let mut n = 0;
    for x in v {
        if x != 0.0 {
            if prev != 0.0 && (x > 0.0) != (prev > 0.0) {
                n += 1;
            }
            prev = x;
        }
    }
    n
}

pub fn integral_tests(g: &SampledSignal, beta: f64) -> IntegralTests {
    let t = g.times();
    let v = g.values();
    let n = t.len();
    let m: Vec<f64> = v.iter().map(|x| abs(*x)).collect();
    let mut notes = alloc::vec![String::from("numerical estimates from samples with tail extrapolation")];
    let max_abs = m.iter().copied().fold(0.0, f64::max);

    let mut out = IntegralTests {
        sr: Convergence::Inconclusive,
        bibo: Convergence::Inconclusive,
        beta_exp: Convergence::Inconclusive,
        beta,
        integral: c(0.0, 0.0),
        abs_integral: 0.0,
        weighted_integral: None,
        bounded: max_abs.is_finite(),
        max_abs,
        tail: None,
        decade_ratio: None,
        envelope: None,
        notes: Vec::new(),
    };
    if n < 8 {
        notes.push("fewer than 8 samples".into());
        out.notes = notes;
        return out;
    }

    // Behaviour as t → 0 from the first decade (or the first few samples).
    let head_end = t.partition_point(|x| *x <= t[0] * 10.0).max(2).min(n);
    let hx: Vec<f64> = (0..head_end).filter(|&i| m[i] > 0.0).map(|i| libm::log(t[i])).collect();
    let hy: Vec<f64> = (0..head_end).filter(|&i| m[i] > 0.0).map(|i| libm::log(m[i])).collect();
    let alpha = if hx.len() >= 2 { linear_fit(&hx, &hy).1 } else { 0.0 };
    let head_integrable = alpha > -1.0 + P_BAND;
    if alpha < -P_BAND {
        out.bounded = false;
        notes.push(format!("|g| grows like t^{:.3} as t → 0", alpha));
    }
    let head_factor = if head_integrable { t[0] / (1.0 + alpha.max(-0.95)) } else { 0.0 };
    if !head_integrable {
        notes.push("g is not integrable at t = 0".into());
    }

    let cum_g = cumulative(t, v, c(0.0, 0.0));
    let cum_abs = cumulative(t, &m, 0.0);
    let head_g = v[0] * head_factor;
    let head_abs = m[0] * head_factor;
    let t_end = t[n - 1];
    let g_end = v[n - 1];
    let m_end = m[n - 1];

    let fit = match fit_tail_exponent(g) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(format!("tail fit: {}", e));
            None
        }
    };
    out.tail = fit;

    let i1 = t.partition_point(|x| *x < t_end / 10.0);
    let i0 = t.partition_point(|x| *x < t_end / 100.0);
    let two_decades = t[0] <= t_end / 100.0 * (1.0 + 1e-12);
    let decade_ratio = if two_decades {
        let d1 = cum_abs[n - 1] - cum_abs[i1];
        let d0 = cum_abs[i1] - cum_abs[i0];
        if d0 > 0.0 {
            Some(d1 / d0)
        } else {
            None
        }
    } else {
        None
    };
    out.decade_ratio = decade_ratio;

    // BIBO.
    let bibo = match fit {
        None => Convergence::Inconclusive,
        Some(f) => match f.shape {
            TailShape::SuperPolynomial => Convergence::Convergent,
            TailShape::PowerLaw if f.p > 1.0 + P_BAND => Convergence::Convergent,
            TailShape::PowerLaw if f.p < 1.0 - P_BAND => Convergence::Divergent,
            TailShape::PowerLaw => match decade_ratio {
                Some(r) if r >= LOG_GROWTH_RATIO => {
                    notes.push(format!(
                        "tail exponent {:.4} in the marginal band; ∫|g| grows by a near-constant amount per decade (ratio {:.3})",
                        f.p, r
                    ));
                    Convergence::Divergent
                }
                Some(r) if r <= libm::pow(10.0, -P_BAND) => Convergence::Convergent,
                _ => Convergence::Inconclusive,
            },
        },
    };
    out.bibo = if head_integrable { bibo } else { Convergence::Divergent };

    let abs_tail = match (out.bibo, fit) {
        (Convergence::Convergent, Some(f)) => match f.shape {
            TailShape::SuperPolynomial => m_end / f.rate.unwrap_or(f64::INFINITY).max(1e-300),
            TailShape::PowerLaw => m_end * t_end / (f.p - 1.0),
        },
        _ => 0.0,
    };
    out.abs_integral = head_abs + cum_abs[n - 1] + abs_tail;

    // Step response.
    let last = &v[i1..];
    let oscillating = sign_changes(last.iter().map(|x| x.re)) >= 2 || sign_changes(last.iter().map(|x| x.im)) >= 2;
    let integral = head_g + cum_g[n - 1];
    if out.bibo == Convergence::Convergent {
        out.sr = Convergence::Convergent;
        let tail = match fit {
            Some(f) if !oscillating => match f.shape {
                TailShape::SuperPolynomial => g_end / f.rate.unwrap_or(f64::INFINITY).max(1e-300),
                TailShape::PowerLaw => g_end * (t_end / (f.p - 1.0)),
            },
            _ => c(0.0, 0.0),
        };
        out.integral = integral + tail;
    } else if oscillating {
        out.integral = integral;
        if two_decades && head_integrable {
            let span = |a: usize, b: usize, base: C64| {
                cum_g[a..b].iter().map(|x| abs(*x - base)).fold(0.0, f64::max)
            };
            let s1 = span(i1, n, cum_g[n - 1]);
            let s0 = span(i0, i1 + 1, cum_g[i1]);
            out.sr = if s1 <= 0.5 * s0 {
                Convergence::Convergent
            } else if s1 >= 0.9 * s0 {
                Convergence::Divergent
            } else {
                Convergence::Inconclusive
            };
            notes.push(format!("oscillating tail: running integral spread {:.3e} over the last decade, {:.3e} over the one before", s1, s0));
        }
    } else {
        out.integral = integral;
        out.sr = out.bibo;
    }

    // β-exponential.
    let beta1 = beta - 0.1;
    let rate = match fit {
        Some(f) if f.shape == TailShape::SuperPolynomial => f.rate.unwrap_or(0.0),
        _ => 0.0,
    };
    let weighted_rate = rate + beta1;
    let weighted = if fit.is_none() {
        Convergence::Inconclusive
    } else if weighted_rate > 1e-9 {
        Convergence::Convergent
    } else if weighted_rate < -1e-9 {
        Convergence::Divergent
    } else {
        out.bibo
    };
    out.beta_exp = match weighted {
        Convergence::Convergent if !out.bounded => Convergence::Divergent,
        other => other,
    };
    if out.beta_exp == Convergence::Convergent {
        let w: Vec<f64> = t
            .iter()
            .zip(&m)
            .map(|(ti, mi)| if *mi > 0.0 { libm::exp(libm::log(*mi) - beta1 * ti) } else { 0.0 })
            .collect();
        let cw = cumulative(t, &w, 0.0);
        out.weighted_integral = Some(w[0] * head_factor + cw[n - 1]);
        let a = -beta1;
        let bound = t
            .iter()
            .zip(&m)
            .map(|(ti, mi)| if *mi > 0.0 { libm::exp(libm::log(*mi) + a * ti) } else { 0.0 })
            .fold(0.0, f64::max);
        out.envelope = Some((bound, a));
    }
    out.notes = notes;
    out
}
