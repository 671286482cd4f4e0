//! SU(2) Clebsch-Gordan coefficients continued to real arguments.
//!
//! Racah's single-sum formula with every factorial `x!` read as `Γ(x+1)`.
//! The sum stays finite as long as `a - α`, `b - β`, `c - γ` and `a + b - c`
//! are integers; the other arguments may be arbitrary reals.

use alloc::format;
use core::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::quad::TanhSinh;
use crate::special::{is_gamma_pole, log_gamma_signed};
use crate::transition::{general_cell_integral, k_constant, CellData};

/// Absolute slack when checking that argument differences are integers.
pub const INTEGER_TOL: f64 = 1e-9;

/// Arguments of `C^{c γ}_{a α; b β}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgArgs {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    pub c: f64,
    pub gamma: f64,
}

/// The integer differences that make the continued sum terminate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CgStructure {
    pub a_minus_alpha: i64,
    pub b_minus_beta: i64,
    pub c_minus_gamma: i64,
    pub a_plus_b_minus_c: i64,
}

impl CgStructure {
    /// Every difference nonnegative, i.e. the coefficient can be nonzero.
    pub fn allowed(&self) -> bool {
        self.a_minus_alpha >= 0 && self.b_minus_beta >= 0 && self.c_minus_gamma >= 0 && self.a_plus_b_minus_c >= 0
    }
}

fn as_integer(x: f64, what: &str) -> Result<i64> {
    let r = libm::round(x);
    if libm::fabs(x - r) > INTEGER_TOL {
        return Err(Error::CgArgs(format!("{what} = {x} is not an integer")));
    }
    Ok(r as i64)
}

impl CgArgs {
    pub fn new(a: f64, alpha: f64, b: f64, beta: f64, c: f64, gamma: f64) -> Self {
        Self { a, alpha, b, beta, c, gamma }
    }

    /// Checks the integer structure; the selection rule `γ = α + β` is not checked here.
    pub fn structure(&self) -> Result<CgStructure> {
        Ok(CgStructure {
            a_minus_alpha: as_integer(self.a - self.alpha, "a - alpha")?,
            b_minus_beta: as_integer(self.b - self.beta, "b - beta")?,
            c_minus_gamma: as_integer(self.c - self.gamma, "c - gamma")?,
            a_plus_b_minus_c: as_integer(self.a + self.b - self.c, "a + b - c")?,
        })
    }

    pub fn satisfies_selection_rule(&self) -> bool {
        libm::fabs(self.alpha + self.beta - self.gamma) <= INTEGER_TOL
    }
}

/// Compensated (Kahan-Babuska) summation.
#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.comp
    }
}

/// `ln Γ(x + 1)` of a factor under the square root; must be positive and finite.
fn ln_root_factorial(x: f64, what: &str) -> Result<f64> {
    let g = log_gamma_signed(x + 1.0).map_err(|_| Error::CgArgs(format!("({what})! has a pole at {what} = {x}")))?;
    if g.sign < 0 {
        return Err(Error::CgArgs(format!("({what})! = Γ({}) is negative", x + 1.0)));
    }
    Ok(g.log_abs)
}

/// Continued Clebsch-Gordan coefficient `C^{c γ}_{a α; b β}`.
///
/// Returns exactly zero when the selection rule `γ = α + β` fails or when any
/// of the integer differences is negative.
pub fn cg_continued(args: &CgArgs) -> Result<f64> {
    let s = args.structure()?;
    if !args.satisfies_selection_rule() || !s.allowed() {
        return Ok(0.0);
    }
    let CgArgs { a, alpha, b, beta, c, gamma } = *args;
    if !(2.0 * c + 1.0 > 0.0) {
        return Err(Error::CgArgs(format!("2c + 1 = {} must be positive", 2.0 * c + 1.0)));
    }
    let ln_pre = 0.5
        * (libm::log(2.0 * c + 1.0)
            + ln_root_factorial(a + b - c, "a+b-c")?
            + ln_root_factorial(a - b + c, "a-b+c")?
            + ln_root_factorial(-a + b + c, "-a+b+c")?
            - ln_root_factorial(a + b + c + 1.0, "a+b+c+1")?
            + ln_root_factorial(a + alpha, "a+alpha")?
            + ln_root_factorial(a - alpha, "a-alpha")?
            + ln_root_factorial(b + beta, "b+beta")?
            + ln_root_factorial(b - beta, "b-beta")?
            + ln_root_factorial(c + gamma, "c+gamma")?
            + ln_root_factorial(c - gamma, "c-gamma")?);

    let z_max = s.a_plus_b_minus_c.min(s.a_minus_alpha);
    let mut sum = KahanSum::default();
    for z in 0..=z_max {
        let zf = z as f64;
        let den = [
            zf,
            (s.a_plus_b_minus_c - z) as f64,
            (s.a_minus_alpha - z) as f64,
            b + beta - zf,
            c - b + alpha + zf,
            c - a - beta + zf,
        ];
        // 1/Γ vanishes at its poles: such terms drop out
        if den.iter().any(|&x| is_gamma_pole(x + 1.0)) {
            continue;
        }
        let mut ln_mag = ln_pre;
        let mut sign = if z % 2 == 0 { 1.0 } else { -1.0 };
        for x in den {
            let g = log_gamma_signed(x + 1.0)?;
            ln_mag -= g.log_abs;
            sign *= f64::from(g.sign);
        }
        sum.add(sign * libm::exp(ln_mag));
    }
    Ok(sum.total())
}

/// The same coefficient recovered from a cell integral by quadrature.
///
/// Inverts `F = (-1)^{q + (l - l_s - N_r)/2} K C / √2` where `F` is the
/// general (unreduced) cell integral and `K` the Gamma-ratio constant.
/// Independent of [`cg_continued`]; used as its oracle.
pub fn cg_from_integral(cell: &CellData, quad: &TanhSinh) -> Result<f64> {
    if cell.ms < 0 || cell.mr < 0 {
        return Err(Error::Domain(format!(
            "cell excesses (N_s - l_s)/2 = {}, (N_r - l_r)/2 = {} must be nonnegative",
            cell.ms, cell.mr
        )));
    }
    let f = general_cell_integral(cell, quad)?;
    let k = k_constant(cell)?;
    // q + (q - m_r) has the parity of m_r
    let phase = if cell.mr % 2 == 0 { 1.0 } else { -1.0 };
    Ok(SQRT_2 * phase * f / k)
}
