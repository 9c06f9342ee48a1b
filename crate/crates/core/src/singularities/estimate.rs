//! Numeric estimation of `f(b + ε) ~ Σ c_ν ε^κ_ν` along the ray `ε > 0`.
//!
//! `f` is sampled on a geometric grid `ε_i = ε_min q^i`. Writing `E` for the
//! shift `ε_i → ε_{i+1}`, a term `c ε^κ` is annihilated by `E - q^κ`, so once
//! `κ_0, …, κ_{k-1}` are known, applying those operators leaves a sequence
//! dominated by `ε^{κ_k}`. Its log-slope, sharpened by Aitken's Δ², gives
//! `κ_k`. Coefficients come from annihilating every other known exponent.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::asymptotics::{AsymExpansion, Term};
use crate::exponent::Exponent;
use crate::expr::{EvalError, TransferExpr};
use crate::util::{abs, aitken, aitken_c, c, cdiv};
use crate::C64;

const SNAP_SPREAD_CAP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateOptions {
    pub eps_min: f64,
    pub eps_max: f64,
    pub per_decade: usize,
    /// Exponents within `snap_tol` of `p/q`, `q <= max_den`, are made exact.
    /// The tolerance widens to twice the measured spread, up to 1e-4.
    pub max_den: i64,
    pub snap_tol: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { eps_min: 1e-8, eps_max: 1e-2, per_decade: 4, max_den: 12, snap_tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TermDiagnostic {
    pub kappa_raw: f64,
    pub snapped: bool,
    /// Spread of the extrapolated slopes over the chosen window.
    pub kappa_spread: f64,
    /// Relative spread of the coefficient estimates over the chosen window.
    pub coeff_spread: f64,
    pub eps_window: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub expansion: AsymExpansion,
    pub diagnostics: Vec<TermDiagnostic>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EstimateError {
    /// The samples are not a sum of powers (logarithmic, essential, …).
    NotAlgebraic(String),
    /// Later exponents could not be separated from earlier ones.
    TruncationFailure(String),
    InvalidOptions,
}

impl fmt::Display for EstimateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateError::NotAlgebraic(why) => write!(f, "unsupported singularity: not algebraic-type ({})", why),
            EstimateError::TruncationFailure(why) => write!(f, "truncation failure ({})", why),
            EstimateError::InvalidOptions => f.write_str("invalid estimation options"),
        }
    }
}

/// Relative accuracy assumed for one evaluation of `f`.
const SAMPLE_NOISE: f64 = 1e-14;
/// A window of extrapolated slopes is accepted when its spread is below this.
const SLOPE_SPREAD_TOL: f64 = 1e-4;

pub fn estimate_expansion(f: &TransferExpr, b: C64, n_terms: usize) -> Result<Estimate, EstimateError> {
    estimate_expansion_with(|s| f.eval(s), b, n_terms, &EstimateOptions::default())
}

pub fn estimate_expansion_with<F>(f: F, b: C64, n_terms: usize, opts: &EstimateOptions) -> Result<Estimate, EstimateError>
where
    F: Fn(C64) -> Result<C64, EvalError>,
{
    if !(opts.eps_min > 0.0 && opts.eps_max > opts.eps_min && opts.per_decade >= 2 && n_terms >= 1) {
        return Err(EstimateError::InvalidOptions);
    }
    let q = libm::pow(10.0, 1.0 / opts.per_decade as f64);
    let decades = libm::log10(opts.eps_max / opts.eps_min);
    let n = libm::ceil(decades * opts.per_decade as f64) as usize + 1 + n_terms + 4;
    let eps: Vec<f64> = (0..n).map(|i| opts.eps_min * libm::pow(q, i as f64)).collect();
    let mut fv = Vec::with_capacity(n);
    for &e in &eps {
        match f(b + c(e, 0.0)) {
            Ok(v) => fv.push(v),
            Err(err) => {
                return Err(EstimateError::NotAlgebraic(format!("evaluation failed at distance {:e}: {}", e, err)));
            }
        }
    }
    let noise0: Vec<f64> = fv.iter().map(|v| SAMPLE_NOISE * abs(*v)).collect();

    let mut notes = Vec::new();
    let mut kappas: Vec<Exponent> = Vec::new();
    let mut diags: Vec<TermDiagnostic> = Vec::new();
    let mut at_rounding = false;
    while kappas.len() < n_terms + 1 {
        let known: Vec<f64> = kappas.iter().map(|k| k.to_f64()).collect();
        let (h, noise) = annihilate(&fv, &noise0, &known, q);
        match find_exponent(&h, &noise, q) {
            Slope::Found { kappa, spread, window } => {
                let tol = opts.snap_tol.max((2.0 * spread).min(SNAP_SPREAD_CAP));
                let snapped = Exponent::snapped(kappa, opts.max_den, tol);
                let k_exp = if snapped.is_exact() { snapped } else { Exponent::real(kappa) };
                if let Some(prev) = kappas.last() {
                    if !(k_exp > *prev) {
                        notes.push(format!(
                            "stopped after {} terms: next exponent {:.6} does not exceed {}",
                            kappas.len(),
                            kappa,
                            prev
                        ));
                        break;
                    }
                }
                if kappas.is_empty() {
                    check_power_law(&h, &eps, k_exp.to_f64(), window)?;
                }
                diags.push(TermDiagnostic {
                    kappa_raw: kappa,
                    snapped: snapped.is_exact(),
                    kappa_spread: spread,
                    coeff_spread: 0.0,
                    eps_window: (eps[window.0], eps[window.1]),
                });
                kappas.push(k_exp);
            }
            Slope::Exhausted => {
                if kappas.is_empty() {
                    return Err(EstimateError::NotAlgebraic("samples are below rounding noise".into()));
                }
                at_rounding = true;
                break;
            }
            Slope::NoPlateau(spread) => {
                if kappas.is_empty() {
                    return Err(EstimateError::NotAlgebraic(format!(
                        "log-slope does not settle (spread {:.2e})",
                        spread
                    )));
                }
                notes.push(format!("term {} not resolved (slope spread {:.2e})", kappas.len(), spread));
                break;
            }
        }
    }

    let n_out = kappas.len().min(n_terms);
    let kappa_max = if kappas.len() > n_out {
        kappas[n_out]
    } else {
        // Nothing further was resolved; the remainder is only known to be
        // smaller than the last term near the point.
        if at_rounding {
            notes.push(format!("residual after {} terms is at rounding level", n_out));
        }
        kappas[n_out - 1] + Exponent::ONE
    };

    let all: Vec<f64> = kappas.iter().map(|k| k.to_f64()).collect();
    let mut terms = Vec::with_capacity(n_out);
    for k in 0..n_out {
        let others: Vec<f64> = all.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect();
        let (h, noise) = annihilate(&fv, &noise0, &others, q);
        let qk = libm::pow(q, all[k]);
        let mut denom = c(1.0, 0.0);
        for o in &others {
            denom *= c(qk - libm::pow(q, *o), 0.0);
        }
        let est: Vec<Option<C64>> = h
            .iter()
            .zip(&noise)
            .enumerate()
            .map(|(i, (v, nz))| {
                if abs(*v) > 1e3 * nz {
                    Some(cdiv(*v, denom * libm::pow(eps[i], all[k])))
                } else {
                    None
                }
            })
            .collect();
        let (coeff, spread) = coefficient_plateau(&est).ok_or_else(|| {
            EstimateError::TruncationFailure(format!("coefficient of term {} is not resolved", k))
        })?;
        diags[k].coeff_spread = spread;
        if abs(coeff) == 0.0 {
            return Err(EstimateError::TruncationFailure(format!("coefficient of term {} vanished", k)));
        }
        terms.push(Term::new(kappas[k], coeff));
    }
    diags.truncate(n_out);
    let expansion = AsymExpansion::new(b, terms, kappa_max)
        .map_err(|e| EstimateError::TruncationFailure(format!("{}", e)))?
        .with_estimated(true);
    Ok(Estimate { expansion, diagnostics: diags, notes })
}

/// Applies `Π (E - q^κ)` over `kappas`, tracking a bound on rounding noise.
fn annihilate(fv: &[C64], noise: &[f64], kappas: &[f64], q: f64) -> (Vec<C64>, Vec<f64>) {
    let mut h = fv.to_vec();
    let mut nz = noise.to_vec();
    for k in kappas {
        let lam = libm::pow(q, *k);
        let m = h.len() - 1;
        for i in 0..m {
            h[i] = h[i + 1] - h[i] * lam;
            nz[i] = nz[i + 1] + nz[i] * lam;
        }
        h.truncate(m);
        nz.truncate(m);
    }
    (h, nz)
}

enum Slope {
    Found { kappa: f64, spread: f64, window: (usize, usize) },
    Exhausted,
    NoPlateau(f64),
}

fn find_exponent(h: &[C64], noise: &[f64], q: f64) -> Slope {
    let lq = libm::log(q);
    let ok: Vec<bool> = h.iter().zip(noise).map(|(v, nz)| abs(*v) > 1e3 * nz && abs(*v) > 0.0).collect();
    let mut slopes: Vec<Option<f64>> = Vec::with_capacity(h.len());
    for i in 0..h.len().saturating_sub(1) {
        slopes.push(if ok[i] && ok[i + 1] { Some(libm::log(abs(h[i + 1]) / abs(h[i])) / lq) } else { None });
    }
    if slopes.iter().filter(|s| s.is_some()).count() < 5 {
        return Slope::Exhausted;
    }
    let mut acc: Vec<Option<f64>> = Vec::new();
    for i in 0..slopes.len().saturating_sub(2) {
        acc.push(match (slopes[i], slopes[i + 1], slopes[i + 2]) {
            (Some(a), Some(b), Some(c)) => Some(aitken(a, b, c)),
            _ => None,
        });
    }
    let mut best: Option<(f64, usize)> = None;
    for i in 0..acc.len().saturating_sub(2) {
        if let (Some(a), Some(b), Some(c)) = (acc[i], acc[i + 1], acc[i + 2]) {
            let spread = a.max(b).max(c) - a.min(b).min(c);
            if best.is_none_or(|(s, _)| spread < s) {
                best = Some((spread, i));
            }
        }
    }
    let Some((spread, i)) = best else {
        return Slope::Exhausted;
    };
    let kappa = acc[i + 1].unwrap();
    if spread > SLOPE_SPREAD_TOL * kappa.abs().max(1.0) {
        return Slope::NoPlateau(spread);
    }
    Slope::Found { kappa, spread, window: (i, (i + 5).min(h.len() - 1)) }
}

/// Rejects slowly drifting slopes (logarithms and the like): the rescaled
/// sequence `h / ε^κ` must settle geometrically over the chosen window.
fn check_power_law(h: &[C64], eps: &[f64], kappa: f64, window: (usize, usize)) -> Result<(), EstimateError> {
    let g: Vec<C64> = (window.0..=window.1).map(|i| h[i] / libm::pow(eps[i], kappa)).collect();
    let d: Vec<f64> = g.windows(2).map(|w| abs(w[1] - w[0])).collect();
    let scale = g.iter().map(|v| abs(*v)).fold(0.0, f64::max);
    let settled = d.iter().all(|x| *x <= 1e-8 * scale);
    let shrinking = d.len() >= 2 && d[0] <= 0.98 * d[d.len() - 1];
    if settled || shrinking {
        Ok(())
    } else {
        Err(EstimateError::NotAlgebraic("rescaled samples do not converge".into()))
    }
}

fn coefficient_plateau(est: &[Option<C64>]) -> Option<(C64, f64)> {
    let mut acc: Vec<Option<C64>> = Vec::new();
    for i in 0..est.len().saturating_sub(2) {
        acc.push(match (est[i], est[i + 1], est[i + 2]) {
            (Some(a), Some(b), Some(c)) => Some(aitken_c(a, b, c)),
            _ => None,
        });
    }
    let mut best: Option<(f64, C64)> = None;
    for i in 0..acc.len().saturating_sub(2) {
        if let (Some(a), Some(b), Some(c)) = (acc[i], acc[i + 1], acc[i + 2]) {
            let scale = abs(b).max(1e-300);
            let spread = (abs(a - b).max(abs(c - b)).max(abs(a - c))) / scale;
            if best.is_none_or(|(s, _)| spread < s) {
                best = Some((spread, b));
            }
        }
    }
    if best.is_none() {
        // Too few resolved samples for extrapolation; fall back to the raw
        // value nearest the singular point.
        return est.iter().flatten().next().map(|v| (*v, f64::INFINITY));
    }
    best.map(|(s, v)| (v, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn coeff(e: &Estimate, i: usize) -> C64 {
        e.expansion.terms()[i].coeff
    }

    #[test]
    fn polar_branch_point_at_origin() {
        let f = parse("1/(s^1.5*(s+1))").unwrap();
        let e = estimate_expansion(&f, c(0.0, 0.0), 2).unwrap();
        let t = e.expansion.terms();
        assert_eq!(t[0].kappa, Exponent::ratio(-3, 2));
        assert_eq!(t[1].kappa, Exponent::ratio(-1, 2));
        assert!((coeff(&e, 0) - c(1.0, 0.0)).norm() < 1e-8);
        assert!((coeff(&e, 1) - c(-1.0, 0.0)).norm() < 1e-6);
        assert_eq!(e.expansion.kappa_max(), Exponent::ratio(1, 2));
        assert!(e.expansion.is_estimated());
    }

    #[test]
    fn regular_point_gives_taylor_exponents() {
        let f = parse("1/(s+1)").unwrap();
        let e = estimate_expansion(&f, c(0.0, 0.0), 3).unwrap();
        let ks: Vec<_> = e.expansion.terms().iter().map(|t| t.kappa).collect();
        assert_eq!(ks, [Exponent::ZERO, Exponent::ONE, Exponent::int(2)]);
        assert!((coeff(&e, 1) - c(-1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn off_origin_point_on_axis() {
        // (s - j)^{1/2} * (s + 2): at j, leading (j + 2) (s - j)^{1/2}.
        let f = parse("(s + (-1)*j)^0.5*(s+2)").unwrap();
        let e = estimate_expansion(&f, c(0.0, 1.0), 2).unwrap();
        assert_eq!(e.expansion.terms()[0].kappa, Exponent::ratio(1, 2));
        assert!((coeff(&e, 0) - c(2.0, 1.0)).norm() < 1e-8);
        assert_eq!(e.expansion.terms()[1].kappa, Exponent::ratio(3, 2));
    }

    #[test]
    fn pure_power_stops_at_rounding() {
        let f = parse("3*s^(-1.5)").unwrap();
        let e = estimate_expansion(&f, c(0.0, 0.0), 2).unwrap();
        assert_eq!(e.expansion.terms().len(), 1);
        assert!((coeff(&e, 0) - c(3.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn logarithm_is_rejected() {
        let r = estimate_expansion_with(|s: C64| Ok(s.ln()), c(0.0, 0.0), 2, &EstimateOptions::default());
        assert!(matches!(r, Err(EstimateError::NotAlgebraic(_))), "{:?}", r);
    }

    #[test]
    fn essential_singularity_is_rejected() {
        let f = parse("exp(s^(-0.5))").unwrap();
        assert!(matches!(estimate_expansion(&f, c(0.0, 0.0), 2), Err(EstimateError::NotAlgebraic(_))));
    }
}
