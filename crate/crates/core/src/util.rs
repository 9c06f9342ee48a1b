use crate::C64;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Smith's algorithm; avoids the overflow of the textbook formula when the
/// divisor is large.
pub(crate) fn cdiv(a: C64, b: C64) -> C64 {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        c((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        c((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

pub(crate) fn abs(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// Principal `z^k`; integer powers by repeated multiplication.
pub(crate) fn cpow(z: C64, k: f64) -> C64 {
    if k == libm::round(k) && k.abs() <= 64.0 {
        let n = k as i32;
        if n >= 0 {
            z.powi(n)
        } else {
            cdiv(c(1.0, 0.0), z.powi(-n))
        }
    } else {
        let l = z.ln();
        (l * k).exp()
    }
}

pub(crate) fn wrap_angle(mut x: f64) -> f64 {
    use core::f64::consts::PI;
    while x > PI {
        x -= 2.0 * PI;
    }
    while x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Aitken Δ² on three consecutive members of a sequence; falls back to the
/// last member when the second difference vanishes.
pub(crate) fn aitken(x0: f64, x1: f64, x2: f64) -> f64 {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let den = d2 - d1;
    if den.abs() <= 1e-300 || !den.is_finite() || (d2.abs() > 0.0 && den.abs() < 1e-14 * d2.abs()) {
        x2
    } else {
        x2 - d2 * d2 / den
    }
}

pub(crate) fn aitken_c(x0: C64, x1: C64, x2: C64) -> C64 {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let den = d2 - d1;
    if abs(den) <= 1e-300 || abs(den) < 1e-14 * abs(d2) {
        x2
    } else {
        x2 - cdiv(d2 * d2, den)
    }
}

/// Least-squares line `y = a + b x`; returns `(a, b, rms residual)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let mut ss = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let r = yi - a - b * xi;
        ss += r * r;
    }
    (a, b, libm::sqrt(ss / n))
}
