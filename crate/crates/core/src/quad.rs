//! Double-exponential (tanh-sinh) quadrature with level doubling.
//!
//! Each node is handed to the integrand together with its distances to both
//! endpoints, computed without cancellation. Integrands such as
//! `cos(θ)^p` near `θ = π/2` stay accurate by evaluating `sin(hi - θ)`.

use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_MAX_LEVEL: u32 = 12;
const MIN_LEVEL: u32 = 3;

/// How the convergence threshold is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    /// `|I_k - I_{k-1}| <= tol`.
    Absolute,
    /// `|I_k - I_{k-1}| <= tol * ∫|f|`, which also copes with integrals that
    /// cancel to zero.
    RelativeToL1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhSinh {
    pub tol: f64,
    pub max_level: u32,
    pub norm: ErrorNorm,
}

impl Default for TanhSinh {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_level: DEFAULT_MAX_LEVEL, norm: ErrorNorm::Absolute }
    }
}

impl TanhSinh {
    pub fn new(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn relative(tol: f64) -> Self {
        Self { tol, norm: ErrorNorm::RelativeToL1, ..Self::default() }
    }

    pub fn with_max_level(mut self, max_level: u32) -> Self {
        self.max_level = max_level;
        self
    }

    /// Integrates `f(x, x - lo, hi - x)` over `(lo, hi)`.
    pub fn integrate_ends<F>(&self, mut f: F, lo: f64, hi: f64) -> Result<f64>
    where
        F: FnMut(f64, f64, f64) -> f64,
    {
        let half = 0.5 * (hi - lo);
        let mut sum = 0.0;
        let mut sum_abs = 0.0;

        // Adds the nodes at t = offset + j*step for j >= 0 (and their mirrors).
        let mut add_nodes = |offset: f64, step: f64, sum: &mut f64, sum_abs: &mut f64| -> Result<()> {
            let mut j = 0u32;
            loop {
                let t = offset + step * f64::from(j);
                j += 1;
                let s = FRAC_PI_2 * libm::sinh(t);
                let ch = libm::cosh(s);
                let w = FRAC_PI_2 * libm::cosh(t) / (ch * ch);
                // 1 - tanh(s) and 1 + tanh(s), both exact for large s
                let e = libm::exp(-2.0 * s);
                let one_minus = 2.0 * e / (1.0 + e);
                let one_plus = 2.0 / (1.0 + e);
                let d_small = half * one_minus;
                if w == 0.0 || d_small == 0.0 || !w.is_finite() {
                    break;
                }
                let d_big = half * one_plus;
                let fr = f(hi - d_small, d_big, d_small);
                let mut term = w * fr;
                let mut term_abs = w * libm::fabs(fr);
                if t != 0.0 {
                    let fl = f(lo + d_small, d_small, d_big);
                    term += w * fl;
                    term_abs += w * libm::fabs(fl);
                }
                if !term.is_finite() {
                    return Err(Error::Domain(alloc::format!(
                        "integrand is not finite near t = {t} on ({lo}, {hi})"
                    )));
                }
                *sum += term;
                *sum_abs += term_abs;
            }
            Ok(())
        };

        let mut step = 1.0;
        add_nodes(0.0, step, &mut sum, &mut sum_abs)?;
        let mut estimate = half * step * sum;
        let mut delta = f64::INFINITY;
        for level in 1..=self.max_level {
            step *= 0.5;
            add_nodes(step, 2.0 * step, &mut sum, &mut sum_abs)?;
            let next = half * step * sum;
            delta = libm::fabs(next - estimate);
            estimate = next;
            let threshold = match self.norm {
                ErrorNorm::Absolute => self.tol,
                ErrorNorm::RelativeToL1 => self.tol * half * step * sum_abs,
            };
            if level >= MIN_LEVEL && delta <= threshold {
                return Ok(estimate);
            }
        }
        Err(Error::NoConvergence { levels: self.max_level, estimate, delta })
    }

    /// Integrates `f(x)` over `(lo, hi)`.
    pub fn integrate<F>(&self, mut f: F, lo: f64, hi: f64) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
    {
        self.integrate_ends(move |x, _, _| f(x), lo, hi)
    }

    /// Integrates a decaying `f(x)` over `(lo, ∞)` through `x = lo + u/(1-u)`.
    ///
    /// Non-finite integrand values in the far tail (`u > 1 - 1e-8`) are read as
    /// zero: they come from `inf * 0` products of a power and a Gaussian.
    pub fn integrate_semi_infinite<F>(&self, mut f: F, lo: f64) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
    {
        self.integrate_ends(
            move |_, du_lo, du_hi| {
                let x = lo + du_lo / du_hi;
                let v = f(x) / (du_hi * du_hi);
                if !v.is_finite() && du_hi < 1e-8 {
                    0.0
                } else {
                    v
                }
            },
            0.0,
            1.0,
        )
    }
}

/// Integrates `f` over `(lo, hi)` to absolute tolerance `tol` with the default level cap.
pub fn integrate<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    TanhSinh::new(tol).integrate(f, lo, hi)
}
