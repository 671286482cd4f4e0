//! The verification report behind `polyosc verify`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use polyosc_core::bases::ModelParams;
use polyosc_core::transition::{
    column_phases, collect_cell_data, expand_inverse_pointwise, expand_pointwise, k_telescoping_check,
    TransitionMatrix,
};
use polyosc_core::tree::Tree;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assemble::assemble;
use crate::error::Result;
use crate::matrix_io::Method;

pub const POINTS_PER_STATE: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tol: f64,
    /// The state pair or point where the deviation peaked.
    pub worst: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tree: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub size: usize,
    /// Per-column signs relating the product matrix to the oracle, when they reconcile.
    pub phases: Option<Vec<i8>>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tree {}  N = {}  matrix {}x{}", self.tree, self.n, self.size, self.size)?;
        for c in &self.checks {
            let status = if c.passed() { "ok  " } else { "FAIL" };
            write!(f, "{status} {:<14} max deviation {:.3e} (tol {:.1e})", c.name, c.max_deviation, c.tol)?;
            if !c.passed() {
                write!(f, " at {}", c.worst)?;
            }
            writeln!(f)?;
        }
        match &self.phases {
            Some(p) if p.iter().all(|&s| s == 1) => writeln!(f, "column phases: all +1"),
            Some(p) => writeln!(f, "column phases: {p:?}"),
            None => writeln!(f, "column phases: not a per-column sign"),
        }
    }
}

fn track(best: &mut (f64, String), value: f64, at: impl FnOnce() -> String) {
    if value > best.0 || value.is_nan() {
        *best = (value, at());
    }
}

fn orthogonality(w: &TransitionMatrix, tol: f64) -> Check {
    let m = w.size();
    let mut worst = (0.0, String::from("-"));
    for i in 0..m {
        for j in 0..m {
            let delta = if i == j { 1.0 } else { 0.0 };
            let rows: f64 = (0..m).map(|k| w.get(i, k) * w.get(j, k)).sum();
            let cols: f64 = (0..m).map(|k| w.get(k, i) * w.get(k, j)).sum();
            track(&mut worst, (rows - delta).abs(), || format!("rows {} {}", w.rows[i], w.rows[j]));
            track(&mut worst, (cols - delta).abs(), || format!("columns {} {}", w.cols[i], w.cols[j]));
        }
    }
    Check { name: "orthogonality", max_deviation: worst.0, tol, worst: worst.1 }
}

fn oracle_equivalence(w: &TransitionMatrix, o: &TransitionMatrix, tol: f64) -> Check {
    let mut worst = (0.0, String::from("-"));
    for i in 0..w.size() {
        for j in 0..w.size() {
            track(&mut worst, (w.get(i, j) - o.get(i, j)).abs(), || {
                format!("{} {} (product {:e}, oracle {:e})", w.rows[i], w.cols[j], w.get(i, j), o.get(i, j))
            });
        }
    }
    Check { name: "oracle", max_deviation: worst.0, tol, worst: worst.1 }
}

fn telescoping(tree: &Tree, params: &ModelParams, w: &TransitionMatrix, tol: f64) -> Result<Check> {
    let mut worst = (0.0, String::from("-"));
    for cart in &w.rows {
        for hyper in &w.cols {
            let cells = collect_cell_data(tree, params, cart, hyper)?;
            if cells.iter().any(|c| c.ms < 0 || c.mr < 0) {
                continue;
            }
            let (lhs, rhs) = k_telescoping_check(tree, params, cart, hyper)?;
            track(&mut worst, ((lhs - rhs) / rhs).abs(), || format!("{cart} {hyper}"));
        }
    }
    Ok(Check { name: "telescoping", max_deviation: worst.0, tol, worst: worst.1 })
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, omega: f64) -> (f64, Vec<f64>) {
    let r = rng.gen_range(0.2..3.0) / omega.sqrt();
    (r, (1..dim).map(|_| rng.gen_range(0.02..FRAC_PI_2 - 0.02)).collect())
}

/// Largest `|lhs - rhs|` relative to the largest `|lhs|` over the sample, per state.
fn pointwise(tree: &Tree, params: &ModelParams, w: &TransitionMatrix, tol: f64, seed: u64) -> Result<[Check; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forward = (0.0, String::from("-"));
    for cart in &w.rows {
        let mut samples = Vec::with_capacity(POINTS_PER_STATE);
        for _ in 0..POINTS_PER_STATE {
            let (r, theta) = random_point(&mut rng, tree.dim(), params.omega());
            let (lhs, rhs) = expand_pointwise(tree, params, cart, r, &theta)?;
            samples.push((lhs, rhs, r, theta));
        }
        let peak = samples.iter().map(|s| s.0.abs()).fold(f64::MIN_POSITIVE, f64::max);
        for (lhs, rhs, r, theta) in samples {
            track(&mut forward, (lhs - rhs).abs() / peak, || format!("{cart} at r = {r}, theta = {theta:?}"));
        }
    }
    let mut inverse = (0.0, String::from("-"));
    for hyper in &w.cols {
        let mut samples = Vec::with_capacity(POINTS_PER_STATE);
        for _ in 0..POINTS_PER_STATE {
            let (r, theta) = random_point(&mut rng, tree.dim(), params.omega());
            let (lhs, rhs) = expand_inverse_pointwise(tree, params, hyper, r, &theta)?;
            samples.push((lhs, rhs, r, theta));
        }
        let peak = samples.iter().map(|s| s.0.abs()).fold(f64::MIN_POSITIVE, f64::max);
        for (lhs, rhs, r, theta) in samples {
            track(&mut inverse, (lhs - rhs).abs() / peak, || format!("{hyper} at r = {r}, theta = {theta:?}"));
        }
    }
    Ok([
        Check { name: "pointwise", max_deviation: forward.0, tol, worst: forward.1 },
        Check { name: "inverse", max_deviation: inverse.0, tol, worst: inverse.1 },
    ])
}

/// Runs orthogonality, oracle equivalence, telescoping and both pointwise checks on shell `n`.
pub fn verify(
    tree: &Tree,
    params: &ModelParams,
    n: u32,
    tol: f64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Report> {
    let w = assemble(tree, params, n, Method::Product, threads)?;
    let o = assemble(tree, params, n, Method::Oracle, threads)?;
    let phases = column_phases(&w, &o, tol).ok();
    let mut checks = vec![orthogonality(&w, tol), oracle_equivalence(&w, &o, tol), telescoping(tree, params, &w, tol)?];
    checks.extend(pointwise(tree, params, &w, tol, seed)?);
    Ok(Report { tree: tree.to_string(), n, size: w.size(), phases, checks })
}
