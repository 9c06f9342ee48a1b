//! Numeric check of the large-`|s|` hypothesis
//! `F(s) = K/s + O(|s|^{-1-δ})` on the closed right half-plane.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::expr::{EvalError, TransferExpr};
use crate::util::{abs, aitken_c, c, cdiv};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct DecayOptions {
    pub delta: f64,
    /// Ray angles, as fractions of π.
    pub rays: Vec<f64>,
    pub radii: Vec<f64>,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            delta: 0.1,
            rays: alloc::vec![0.0, 0.5, -0.5, 0.55, -0.55],
            radii: (0..9).map(|i| libm::pow(10.0, 2.0 + 0.5 * i as f64)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayCheck {
    /// Angle of the ray, as a fraction of π.
    pub angle: f64,
    /// `(r, |s^{1+δ}(F(s) - K/s)|)` at the radii that evaluated.
    pub samples: Vec<(f64, f64)>,
    pub pass: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    /// Estimated `lim s F(s)`.
    pub k: C64,
    pub delta: f64,
    pub pass: bool,
    pub rays: Vec<RayCheck>,
    pub notes: Vec<String>,
}

impl DecayReport {
    pub fn failing_rays(&self) -> impl Iterator<Item = &RayCheck> {
        self.rays.iter().filter(|r| !r.pass)
    }
}

pub fn check_decay(f: &TransferExpr, opts: &DecayOptions) -> DecayReport {
    check_decay_with(|s| f.eval(s), opts)
}

pub fn check_decay_with<F>(f: F, opts: &DecayOptions) -> DecayReport
where
    F: Fn(C64) -> Result<C64, EvalError>,
{
    let mut notes = Vec::new();
    let k = estimate_k(&f, &mut notes);
    let mut rays = Vec::new();
    for &angle in &opts.rays {
        let dir = c(libm::cos(angle * PI), libm::sin(angle * PI));
        let mut ray = RayCheck { angle, samples: Vec::new(), pass: true, notes: Vec::new() };
        for &r in &opts.radii {
            let s = dir * r;
            match f(s) {
                Ok(v) => {
                    let rem = v - cdiv(k, s);
                    let qv = abs(rem) * libm::pow(r, 1.0 + opts.delta);
                    ray.samples.push((r, qv));
                }
                Err(EvalError::NonFinite(v)) if v.re.is_nan() || v.im.is_nan() => {
                    ray.notes.push(format!("indeterminate value at r = {:e}; radius skipped", r));
                }
                Err(e) => {
                    ray.pass = false;
                    ray.notes.push(format!("F diverges along arg s = {}π at r = {:e} ({})", angle, r, e));
                    break;
                }
            }
        }
        if ray.pass {
            for w in ray.samples.windows(2) {
                let (r0, q0) = w[0];
                let (r1, q1) = w[1];
                if !(q1.is_finite() && q1 <= q0 * (1.0 + 1e-3) + 1e-12) {
                    ray.pass = false;
                    ray.notes.push(format!(
                        "|s|^(1+δ)|F - K/s| grows along arg s = {}π: {:.3e} at r = {:e} → {:.3e} at r = {:e}",
                        angle, q0, r0, q1, r1
                    ));
                    break;
                }
            }
            if ray.samples.len() < 2 {
                ray.pass = false;
                ray.notes.push(format!("too few finite samples along arg s = {}π", angle));
            }
        }
        rays.push(ray);
    }
    let pass = rays.iter().all(|r| r.pass);
    DecayReport { k, delta: opts.delta, pass, rays, notes }
}

/// `K = lim s F(s)` along the positive real axis; zero when `s F(s)`
/// visibly decays.
fn estimate_k<F>(f: &F, notes: &mut Vec<String>) -> C64
where
    F: Fn(C64) -> Result<C64, EvalError>,
{
    let rs = [1e3, 1e4, 1e5, 1e6];
    let vals: Vec<(f64, C64)> = rs
        .iter()
        .filter_map(|&r| f(c(r, 0.0)).ok().map(|v| (r, v * r)))
        .collect();
    if vals.len() < 2 {
        notes.push("s·F(s) could not be evaluated at large real s; K taken as 0".into());
        return c(0.0, 0.0);
    }
    let (r0, v0) = vals[vals.len() - 2];
    let (r1, v1) = vals[vals.len() - 1];
    let slope = if abs(v0) > 0.0 && abs(v1) > 0.0 {
        libm::log(abs(v1) / abs(v0)) / libm::log(r1 / r0)
    } else {
        -1.0
    };
    if abs(v1) == 0.0 || slope < -0.05 {
        return c(0.0, 0.0);
    }
    if vals.len() >= 3 {
        let n = vals.len();
        aitken_c(vals[n - 3].1, vals[n - 2].1, vals[n - 1].1)
    } else {
        v1
    }
}
