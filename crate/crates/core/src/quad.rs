//! Gauss–Legendre quadrature, fixed and adaptive.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::util::{abs, c};
use crate::C64;

#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule on [-1, 1]; nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F, E>(&self, f: &mut F, a: f64, b: f64) -> Result<C64, E>
    where
        F: FnMut(f64) -> Result<C64, E>,
    {
        let h = 0.5 * (b - a);
        let m = 0.5 * (b + a);
        let mut acc = c(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(m + h * x)? * *w;
        }
        Ok(acc * h)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
    /// All panels met the tolerance before the depth limit.
    pub converged: bool,
}

/// Adaptive bisection driven by the difference between a 16-point and a
/// 32-point rule on each panel.
pub struct Adaptive {
    coarse: GaussLegendre,
    fine: GaussLegendre,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self::new(1e-13, 1e-11, 30)
    }
}

impl Adaptive {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Self {
        Adaptive { coarse: GaussLegendre::new(16), fine: GaussLegendre::new(32), abs_tol, rel_tol, max_depth }
    }

    pub fn integrate<F, E>(&self, f: &mut F, a: f64, b: f64) -> Result<QuadResult, E>
    where
        F: FnMut(f64) -> Result<C64, E>,
    {
        let mut out = QuadResult { value: c(0.0, 0.0), error: 0.0, evaluations: 0, converged: true };
        let whole = self.fine.integrate(f, a, b)?;
        out.evaluations += self.fine.len();
        let scale = abs(whole);
        self.panel(f, a, b, whole, scale, b - a, 0, &mut out)?;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn panel<F, E>(
        &self,
        f: &mut F,
        a: f64,
        b: f64,
        fine: C64,
        scale: f64,
        total: f64,
        depth: u32,
        out: &mut QuadResult,
    ) -> Result<(), E>
    where
        F: FnMut(f64) -> Result<C64, E>,
    {
        let coarse = self.coarse.integrate(f, a, b)?;
        out.evaluations += self.coarse.len();
        let err = abs(fine - coarse);
        let budget = (self.abs_tol.max(self.rel_tol * scale)) * ((b - a) / total).max(1e-3);
        if err <= budget || depth >= self.max_depth {
            if err > budget {
                out.converged = false;
            }
            out.value += fine;
            out.error += err;
            return Ok(());
        }
        let m = 0.5 * (a + b);
        let left = self.fine.integrate(f, a, m)?;
        let right = self.fine.integrate(f, m, b)?;
        out.evaluations += 2 * self.fine.len();
        let scale = scale.max(abs(left + right));
        self.panel(f, a, m, left, scale, total, depth + 1, out)?;
        self.panel(f, m, b, right, scale, total, depth + 1, out)
    }
}
