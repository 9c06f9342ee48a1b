//! Decay law of a sampled signal over its last decade.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use super::signal::SampledSignal;
use crate::util::{abs, c, linear_fit};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailShape {
    /// `|g| ≈ C t^{-p}`.
    PowerLaw,
    /// Faster than any power; `rate` is the fitted exponential rate.
    SuperPolynomial,
}

impl TailShape {
    pub fn name(self) -> &'static str {
        match self {
            TailShape::PowerLaw => "power-law",
            TailShape::SuperPolynomial => "super-polynomial",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit {
    pub shape: TailShape,
    pub p: f64,
    /// Complex `C` for non-oscillating tails, envelope amplitude otherwise.
    pub coeff: C64,
    /// RMS of the log-log fit.
    pub residual: f64,
    /// RMS of the log-linear (exponential) fit, for comparison.
    pub residual_exp: f64,
    pub rate: Option<f64>,
    pub omega: Option<f64>,
    /// The fit used oscillation peaks rather than every sample.
    pub envelope: bool,
    pub window: (f64, f64),
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailFitError {
    /// Less than one decade, or fewer than 8 samples in it.
    TooShort,
    AllZero,
    /// Oscillation without enough resolved peaks to fit an envelope.
    Inconclusive,
}

impl fmt::Display for TailFitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailFitError::TooShort => "inconclusive: grid shorter than one decade",
            TailFitError::AllZero => "last decade of samples is identically zero",
            TailFitError::Inconclusive => "inconclusive: oscillation without resolvable envelope",
        })
    }
}

/// Samples with `t >= T/10`, where `T` is the last time.
pub(crate) fn last_decade(g: &SampledSignal) -> Result<usize, TailFitError> {
    let t = g.times();
    let n = t.len();
    if n < 8 {
        return Err(TailFitError::TooShort);
    }
    let t_end = t[n - 1];
    if t[0] > t_end / 10.0 * (1.0 + 1e-12) {
        return Err(TailFitError::TooShort);
    }
    let start = t.partition_point(|x| *x < t_end / 10.0 * (1.0 - 1e-12));
    if n - start < 8 {
        return Err(TailFitError::TooShort);
    }
    Ok(start)
}

fn deep_minima(m: &[f64]) -> usize {
    (1..m.len().saturating_sub(1))
        .filter(|&i| m[i] < m[i - 1] && m[i] <= m[i + 1] && m[i] < 0.5 * m[i - 1].max(m[i + 1]))
        .count()
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

/// Peaks of `m`, refined by a parabola through each peak and its neighbours.
fn peaks(t: &[f64], m: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..m.len().saturating_sub(1) {
        if m[i] >= m[i - 1] && m[i] > m[i + 1] {
            let (x0, x1, x2) = (t[i - 1], t[i], t[i + 1]);
            let (y0, y1, y2) = (m[i - 1], m[i], m[i + 1]);
            let d01 = (y1 - y0) / (x1 - x0);
            let d12 = (y2 - y1) / (x2 - x1);
            let a = (d12 - d01) / (x2 - x0);
            if a < 0.0 {
                let xv = (0.5 * (x0 + x1) - d01 / (2.0 * a)).clamp(x0, x2);
                let yv = y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1);
                out.push((xv, yv.max(y1)));
            } else {
                out.push((x1, y1));
            }
        }
    }
    out
}

/// Dominant angular frequency from a DFT of the last (up to 1024) samples,
/// linearly resampled onto a uniform grid over their span.
fn dominant_frequency(t: &[f64], v: &[C64], real: bool) -> Option<f64> {
    let n = t.len().min(1024);
    if n < 16 {
        return None;
    }
    let t = &t[t.len() - n..];
    let v = &v[v.len() - n..];
    let (t0, t1) = (t[0], t[n - 1]);
    let h = (t1 - t0) / (n - 1) as f64;
    let mut u = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let x = t0 + h * k as f64;
        while j + 2 < n && t[j + 1] < x {
            j += 1;
        }
        let w = ((x - t[j]) / (t[j + 1] - t[j])).clamp(0.0, 1.0);
        u.push(v[j] * (1.0 - w) + v[j + 1] * w);
    }
    let mean: C64 = u.iter().sum::<C64>() / n as f64;
    let (lo, hi) = if real { (0i64, n as i64 / 2) } else { (-(n as i64) / 2, n as i64 / 2) };
    let amp = |k: i64| {
        let mut acc = c(0.0, 0.0);
        let w = -2.0 * PI * k as f64 / n as f64;
        for (i, x) in u.iter().enumerate() {
            let ph = w * i as f64;
            acc += (x - mean) * c(libm::cos(ph), libm::sin(ph));
        }
        abs(acc)
    };
    let spectrum: Vec<f64> = (lo..=hi).map(amp).collect();
    let (mut best, mut at) = (0.0, None);
    for (i, a) in spectrum.iter().enumerate() {
        let k = lo + i as i64;
        if k != 0 && *a > best {
            best = *a;
            at = Some(i);
        }
    }
    let i = at?;
    let mut k = (lo + i as i64) as f64;
    if i > 0 && i + 1 < spectrum.len() {
        let (a0, a1, a2) = (spectrum[i - 1], spectrum[i], spectrum[i + 1]);
        let den = a0 - 2.0 * a1 + a2;
        if den < 0.0 {
            k += 0.5 * (a0 - a2) / den;
        }
    }
    Some(2.0 * PI * k / (h * n as f64))
}

pub fn fit_tail_exponent(g: &SampledSignal) -> Result<TailFit, TailFitError> {
    let start = last_decade(g)?;
    let t = &g.times()[start..];
    let v = &g.values()[start..];
    let m: Vec<f64> = v.iter().map(|x| abs(*x)).collect();
    if m.iter().all(|x| *x == 0.0) {
        return Err(TailFitError::AllZero);
    }
    let window = (t[0], t[t.len() - 1]);
    let real = v.iter().all(|x| x.im == 0.0);
    let oscillating_parts = sign_changes(v.iter().map(|x| x.re)) >= 2 || sign_changes(v.iter().map(|x| x.im)) >= 2;
    let envelope = deep_minima(&m) >= 2;

    let pts: Vec<(f64, f64)> = if envelope {
        let p = peaks(t, &m);
        if p.len() < 4 {
            return Err(TailFitError::Inconclusive);
        }
        p
    } else {
        t.iter().zip(&m).filter(|(_, y)| **y > 0.0).map(|(x, y)| (*x, *y)).collect()
    };
    let omega = if oscillating_parts { dominant_frequency(t, v, real) } else { None };

    if pts.len() < 2 || m.contains(&0.0) && !envelope {
        let rate = if pts.len() >= 2 {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| libm::log(p.1)).collect();
            -linear_fit(&xs, &ys).1
        } else {
            f64::INFINITY
        };
        return Ok(TailFit {
            shape: TailShape::SuperPolynomial,
            p: f64::INFINITY,
            coeff: c(0.0, 0.0),
            residual: f64::INFINITY,
            residual_exp: 0.0,
            rate: Some(rate),
            omega,
            envelope,
            window,
            points: pts.len(),
        });
    }

    let lx: Vec<f64> = pts.iter().map(|p| libm::log(p.0)).collect();
    let tx: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ly: Vec<f64> = pts.iter().map(|p| libm::log(p.1)).collect();
    let (a_pow, b_pow, rms_pow) = linear_fit(&lx, &ly);
    let (_, b_exp, rms_exp) = linear_fit(&tx, &ly);
    let p = -b_pow;

    let super_poly = b_exp < 0.0 && rms_exp < 0.2 * rms_pow && rms_pow > 1e-3;
    if super_poly {
        return Ok(TailFit {
            shape: TailShape::SuperPolynomial,
            p,
            coeff: c(0.0, 0.0),
            residual: rms_pow,
            residual_exp: rms_exp,
            rate: Some(-b_exp),
            omega,
            envelope,
            window,
            points: pts.len(),
        });
    }
    let coeff = if envelope || omega.is_some() {
        c(libm::exp(a_pow), 0.0)
    } else {
        let s: C64 = t.iter().zip(v).map(|(ti, vi)| vi * libm::pow(*ti, p)).sum();
        s / t.len() as f64
    };
    Ok(TailFit {
        shape: TailShape::PowerLaw,
        p,
        coeff,
        residual: rms_pow,
        residual_exp: rms_exp,
        rate: None,
        omega,
        envelope,
        window,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::signal::log_grid;
    use super::*;

    #[test]
    fn power_law_tail() {
        let t = log_grid(1e-2, 1e6, 40, f64::INFINITY);
        let g = SampledSignal::from_fn(t, |t| libm::pow(t + 1.0, -1.5)).unwrap();
        let fit = fit_tail_exponent(&g).unwrap();
        assert_eq!(fit.shape, TailShape::PowerLaw);
        assert!((fit.p - 1.5).abs() < 1e-3, "{}", fit.p);
        assert!((fit.coeff.re - 1.0).abs() < 1e-3);
    }

    #[test]
    fn exponential_tail_rejects_power_law() {
        let t = log_grid(1e-3, 50.0, 200, 0.05);
        let g = SampledSignal::from_fn(t, |t| libm::exp(-t)).unwrap();
        let fit = fit_tail_exponent(&g).unwrap();
        assert_eq!(fit.shape, TailShape::SuperPolynomial);
        assert!((fit.rate.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn oscillating_envelope() {
        let t = log_grid(1e-3, 1e4, 50, 0.25);
        let g = SampledSignal::from_fn(t, |t| libm::sin(2.0 * t) / t).unwrap();
        let fit = fit_tail_exponent(&g).unwrap();
        assert!(fit.envelope);
        assert!((fit.p - 1.0).abs() < 0.01, "{}", fit.p);
        assert!((fit.omega.unwrap() - 2.0).abs() < 0.05, "{:?}", fit.omega);
    }

    #[test]
    fn short_grid_is_inconclusive() {
        let t = log_grid(1.0, 5.0, 100, 1.0);
        let g = SampledSignal::from_fn(t, |t| 1.0 / t).unwrap();
        assert_eq!(fit_tail_exponent(&g), Err(TailFitError::TooShort));
    }
}
