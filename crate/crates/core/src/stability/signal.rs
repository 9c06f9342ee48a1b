use alloc::vec::Vec;
use core::fmt;

use crate::util::{c, is_finite};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Uniform,
    Log,
    Other,
}

/// Samples of a time signal on a strictly increasing grid of positive
/// times.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    times: Vec<f64>,
    values: Vec<C64>,
    grid: GridKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SignalError {
    LengthMismatch,
    NotIncreasing(usize),
    NonPositiveTime,
    NonFinite(usize),
}

impl fmt::Display for SignalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalError::LengthMismatch => f.write_str("times and values differ in length"),
            SignalError::NotIncreasing(i) => write!(f, "times not strictly increasing at index {}", i),
            SignalError::NonPositiveTime => f.write_str("times must be positive"),
            SignalError::NonFinite(i) => write!(f, "non-finite sample at index {}", i),
        }
    }
}

impl SampledSignal {
    pub fn new(times: Vec<f64>, values: Vec<C64>) -> Result<Self, SignalError> {
        if times.len() != values.len() {
            return Err(SignalError::LengthMismatch);
        }
        if times.first().is_some_and(|t| !(*t > 0.0)) {
            return Err(SignalError::NonPositiveTime);
        }
        for i in 1..times.len() {
            if !(times[i] > times[i - 1]) || !times[i].is_finite() {
                return Err(SignalError::NotIncreasing(i));
            }
        }
        if let Some(i) = values.iter().position(|v| !is_finite(*v)) {
            return Err(SignalError::NonFinite(i));
        }
        let grid = detect_grid(&times);
        Ok(SampledSignal { times, values, grid })
    }

    pub fn from_real(times: Vec<f64>, values: &[f64]) -> Result<Self, SignalError> {
        Self::new(times, values.iter().map(|v| c(*v, 0.0)).collect())
    }

    /// Samples `g` at every time in `times`.
    pub fn from_fn(times: Vec<f64>, g: impl Fn(f64) -> f64) -> Result<Self, SignalError> {
        let values = times.iter().map(|t| c(g(*t), 0.0)).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn grid(&self) -> GridKind {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Multiplies every sample by `k`.
    pub fn scaled(&self, k: C64) -> Self {
        SampledSignal { values: self.values.iter().map(|v| v * k).collect(), ..self.clone() }
    }
}

fn detect_grid(t: &[f64]) -> GridKind {
    if t.len() < 3 {
        return GridKind::Other;
    }
    let n = t.len();
    let h0 = t[1] - t[0];
    if t.windows(2).all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-9 * h0.abs().max(t[n - 1].abs() * 1e-6)) {
        return GridKind::Uniform;
    }
    let r0 = t[1] / t[0];
    if t.windows(2).all(|w| ((w[1] / w[0]) - r0).abs() <= 1e-9 * r0) {
        return GridKind::Log;
    }
    GridKind::Other
}

/// Log-spaced times from `t_min` to `t_max`, with consecutive points never
/// further apart than `max_step` (so oscillations stay resolved).
pub fn log_grid(t_min: f64, t_max: f64, per_decade: usize, max_step: f64) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min && per_decade > 0);
    let ratio = libm::pow(10.0, 1.0 / per_decade as f64);
    let mut out = alloc::vec![t_min];
    let mut t = t_min;
    while t < t_max {
        let next = (t * ratio).min(t + max_step).min(t_max);
        if next <= t {
            break;
        }
        out.push(next);
        t = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SampledSignal::from_real(alloc::vec![1.0, 1.0], &[0.0, 0.0]).is_err());
        assert!(SampledSignal::from_real(alloc::vec![1.0, 2.0], &[0.0, f64::NAN]).is_err());
        assert!(SampledSignal::from_real(alloc::vec![0.0, 2.0], &[0.0, 0.0]).is_err());
        assert_eq!(
            SampledSignal::from_real(alloc::vec![1.0, 2.0, 3.0], &[0.0; 3]).unwrap().grid(),
            GridKind::Uniform
        );
        assert_eq!(
            SampledSignal::from_real(alloc::vec![1.0, 10.0, 100.0], &[0.0; 3]).unwrap().grid(),
            GridKind::Log
        );
    }

    #[test]
    fn capped_log_grid() {
        let g = log_grid(1e-3, 1e3, 20, 0.5);
        assert_eq!(g[0], 1e-3);
        assert_eq!(*g.last().unwrap(), 1e3);
        assert!(g.windows(2).all(|w| w[1] - w[0] <= 0.5 + 1e-12 && w[1] > w[0]));
    }
}
