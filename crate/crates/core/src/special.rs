//! Scalar special-function kernels: signed log-gamma and the Laguerre and
//! Jacobi polynomials by forward recurrence.

use alloc::format;

use crate::error::{Error, Result};

const POLE_TOL: f64 = 1e-12;

/// `ln|Γ(x)|` together with the sign of `Γ(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogGamma {
    pub log_abs: f64,
    pub sign: i8,
}

impl SignedLogGamma {
    pub fn value(self) -> f64 {
        f64::from(self.sign) * libm::exp(self.log_abs)
    }
}

/// Returns `true` when `x` lies within the pole tolerance of a nonpositive integer.
pub fn is_gamma_pole(x: f64) -> bool {
    x <= POLE_TOL && libm::fabs(x - libm::round(x)) <= POLE_TOL
}

pub fn log_gamma_signed(x: f64) -> Result<SignedLogGamma> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma_signed of non-finite {x}")));
    }
    if is_gamma_pole(x) {
        return Err(Error::Pole { x });
    }
    let (log_abs, sign) = libm::lgamma_r(x);
    Ok(SignedLogGamma { log_abs, sign: if sign < 0 { -1 } else { 1 } })
}

/// `ln Γ(x)` for `x > 0`.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma needs a positive argument, got {x}");
    libm::lgamma_r(x).0
}

/// Associated Laguerre polynomial `L_n^ν(x)`.
pub fn laguerre(n: u32, nu: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + nu - x;
    for k in 1..n {
        let k = f64::from(k);
        let next = ((2.0 * k + 1.0 + nu - x) * cur - (k + nu) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Jacobi polynomial `P_q^{(α,β)}(x)`.
pub fn jacobi(q: u32, alpha: f64, beta: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if q == 0 {
        return prev;
    }
    let ab = alpha + beta;
    let mut cur = 0.5 * (ab + 2.0) * x + 0.5 * (alpha - beta);
    for n in 2..=q {
        let n = f64::from(n);
        let s = 2.0 * n + ab;
        let a1 = 2.0 * n * (n + ab) * (s - 2.0);
        let a2 = (s - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (s - 2.0) * (s - 1.0) * s;
        let a4 = 2.0 * (n + alpha - 1.0) * (n + beta - 1.0) * s;
        let next = ((a2 + a3 * x) * cur - a4 * prev) / a1;
        prev = cur;
        cur = next;
    }
    cur
}

/// Squared norm `∫_{-1}^{1} (1-x)^α (1+x)^β [P_q^{(α,β)}(x)]² dx`.
pub fn jacobi_norm_sq(q: u32, alpha: f64, beta: f64) -> f64 {
    let q = f64::from(q);
    let log = (alpha + beta + 1.0) * core::f64::consts::LN_2 - libm::log(2.0 * q + alpha + beta + 1.0)
        + ln_gamma(q + alpha + 1.0)
        + ln_gamma(q + beta + 1.0)
        - ln_gamma(q + 1.0)
        - ln_gamma(q + alpha + beta + 1.0);
    libm::exp(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn gamma(x: f64) -> f64 {
        log_gamma_signed(x).unwrap().value()
    }

    /// Binomial coefficient with real upper argument, by the falling product.
    fn binom(top: f64, k: u32) -> f64 {
        (1..=k).map(|i| (top - f64::from(k) + f64::from(i)) / f64::from(i)).product()
    }

    fn laguerre_series(n: u32, nu: f64, x: f64) -> f64 {
        (0..=n)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * binom(f64::from(n) + nu, n - m) * libm::pow(x, f64::from(m)) / (1..=m).map(f64::from).product::<f64>()
            })
            .sum()
    }

    fn jacobi_series(q: u32, alpha: f64, beta: f64, x: f64) -> f64 {
        let qf = f64::from(q);
        (0..=q)
            .map(|m| {
                binom(qf + alpha, q - m)
                    * binom(qf + beta, m)
                    * libm::pow((x - 1.0) / 2.0, f64::from(m))
                    * libm::pow((x + 1.0) / 2.0, f64::from(q - m))
            })
            .sum()
    }

    #[test]
    fn log_gamma_examples() {
        let g1 = log_gamma_signed(1.0).unwrap();
        assert!(g1.log_abs.abs() < 1e-15);
        assert_eq!(g1.sign, 1);

        let g = log_gamma_signed(0.5).unwrap();
        assert!((g.log_abs - libm::log(libm::sqrt(PI))).abs() < 1e-14);
        assert_eq!(g.sign, 1);

        // Γ(-1/2) = π / (sin(-π/2) Γ(3/2)) = -2√π
        let g = log_gamma_signed(-0.5).unwrap();
        assert!((g.log_abs - libm::log(2.0 * libm::sqrt(PI))).abs() < 1e-14);
        assert_eq!(g.sign, -1);
    }

    #[test]
    fn log_gamma_poles_and_signs() {
        for x in [0.0, -1.0, -2.0, -7.0, -3.0 + 5e-13] {
            assert!(matches!(log_gamma_signed(x), Err(Error::Pole { .. })), "{x}");
        }
        assert!(log_gamma_signed(-3.0 + 1e-9).is_ok());
        assert!(log_gamma_signed(f64::NAN).is_err());
        // sign alternates between consecutive poles
        for (x, s) in [(-0.5, -1), (-1.5, 1), (-2.5, -1), (-3.5, 1), (2.5, 1)] {
            assert_eq!(log_gamma_signed(x).unwrap().sign, s, "{x}");
        }
    }

    #[test]
    fn gamma_recurrence_positive_range() {
        let mut x = 0.1;
        while x <= 30.0 {
            let lhs = gamma(x + 1.0);
            let rhs = x * gamma(x);
            assert!(((lhs - rhs) / lhs).abs() < 1e-13, "x = {x}");
            x += 0.173;
        }
    }

    #[test]
    fn gamma_recurrence_log_space() {
        let mut x = -5.5;
        while x <= 20.0 {
            if !is_gamma_pole(x) && !is_gamma_pole(x + 1.0) && libm::fabs(x) > 1e-6 {
                let a = log_gamma_signed(x + 1.0).unwrap();
                let b = log_gamma_signed(x).unwrap();
                let log_rhs = libm::log(libm::fabs(x)) + b.log_abs;
                let sign_rhs = b.sign * if x < 0.0 { -1 } else { 1 };
                assert!((a.log_abs - log_rhs).abs() < 1e-12, "x = {x}");
                assert_eq!(a.sign, sign_rhs, "x = {x}");
            }
            x += 0.0937;
        }
    }

    #[test]
    fn laguerre_low_orders() {
        assert_eq!(laguerre(0, 0.3, 2.7), 1.0);
        assert!((laguerre(1, 0.3, 1.0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn laguerre_matches_series() {
        let v = laguerre(5, 1.25, 3.1);
        let s = laguerre_series(5, 1.25, 3.1);
        assert!((v - s).abs() < 1e-12, "{v} vs {s}");
        for n in 0..=10 {
            for nu in [-0.4, 0.5, 2.3] {
                for x in [0.1, 1.0, 5.0] {
                    let v = laguerre(n, nu, x);
                    let s = laguerre_series(n, nu, x);
                    let scale = s.abs().max(1e-300);
                    assert!((v - s).abs() / scale < 1e-11, "n={n} nu={nu} x={x}: {v} vs {s}");
                }
            }
        }
    }

    #[test]
    fn jacobi_low_orders() {
        assert_eq!(jacobi(0, 0.7, 1.9, 0.4), 1.0);
        assert!((jacobi(1, 0.7, 1.9, 0.4) - 0.32).abs() < 1e-15);
    }

    #[test]
    fn jacobi_matches_series() {
        let v = jacobi(6, 0.37, 2.1, -0.55);
        let s = jacobi_series(6, 0.37, 2.1, -0.55);
        assert!((v - s).abs() < 1e-12, "{v} vs {s}");
        for q in 0..8 {
            for (a, b) in [(-0.4, 0.3), (1.5, -0.7), (2.25, 3.5)] {
                for x in [-1.0, -0.3, 0.2, 0.95, 1.0] {
                    let v = jacobi(q, a, b, x);
                    let s = jacobi_series(q, a, b, x);
                    assert!((v - s).abs() <= 1e-11 * s.abs().max(1.0), "q={q} a={a} b={b} x={x}");
                }
            }
        }
    }

    #[test]
    fn jacobi_norm_for_legendre() {
        for q in 0..6 {
            let h = jacobi_norm_sq(q, 0.0, 0.0);
            assert!((h - 2.0 / (2.0 * f64::from(q) + 1.0)).abs() < 1e-14);
        }
    }
}
