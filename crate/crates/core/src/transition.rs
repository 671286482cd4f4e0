//! Transition matrix between the Cartesian and hyperspherical bases.
//!
//! Every internal node of the tree contributes one continued Clebsch-Gordan
//! coefficient with phase `(-1)^{c - a - β}`; the matrix element is the
//! product over cells. [`oracle_transition`] evaluates the same element from
//! the overlap integral, one tanh-sinh quadrature per cell, and serves as the
//! independent check.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, SQRT_2};

use crate::bases::{
    cartesian_wavefunction, cell_function, enumerate_cartesian, enumerate_hyperspherical, hyperspherical_wavefunction,
    node_momenta, CartesianState, HypersphericalState, ModelParams,
};
use crate::cg::{cg_continued, CgArgs};
use crate::error::{Error, Result};
use crate::quad::{TanhSinh, DEFAULT_TOL};
use crate::special::{ln_gamma, log_gamma_signed};
use crate::tree::{CellType, NodeId, NodeKind, Tree};

/// Everything one cell contributes, for a fixed pair of states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellData {
    pub node: NodeId,
    pub kind: CellType,
    pub ls: f64,
    pub vs: u32,
    pub lr: f64,
    pub vr: u32,
    /// Sum of `ñ_i = 2n_i ± k_i + ½` over the leaves of the left subtree.
    pub ns: f64,
    pub nr: f64,
    /// Momentum of this node, `2q + l_s + l_r`.
    pub l: f64,
    pub q: u32,
    /// `(N_s - l_s)/2`, exact. Negative values make the cell vanish.
    pub ms: i64,
    /// `(N_r - l_r)/2`, exact.
    pub mr: i64,
}

impl CellData {
    /// `(N_s + N_r - l)/2 = m_s + m_r - q`.
    pub fn excess(&self) -> i64 {
        self.ms + self.mr - i64::from(self.q)
    }

    /// `1` for cell d, `1/√2` for b and c, `1/2` for a.
    pub fn leaf_prefactor(&self) -> f64 {
        libm::pow(core::f64::consts::FRAC_1_SQRT_2, f64::from(self.kind.leaf_children()))
    }
}

fn check_pair(tree: &Tree, params: &ModelParams, cart: &CartesianState, hyper: &HypersphericalState) -> Result<()> {
    params.check_tree(tree)?;
    if cart.n.len() != tree.dim() {
        return Err(Error::InvalidParams(format!(
            "cartesian state has {} entries, tree has {} leaves",
            cart.n.len(),
            tree.dim()
        )));
    }
    if cart.principal() != hyper.principal() {
        return Err(Error::ShellMismatch { cartesian: cart.principal(), hyperspherical: hyper.principal() });
    }
    Ok(())
}

/// One [`CellData`] per internal node, in angle order.
pub fn collect_cell_data(
    tree: &Tree,
    params: &ModelParams,
    cart: &CartesianState,
    hyper: &HypersphericalState,
) -> Result<Vec<CellData>> {
    check_pair(tree, params, cart, hyper)?;
    let momenta = node_momenta(tree, params, hyper)?;
    let count = tree.nodes().count();
    // per vertex: Σ ñ over leaves below, and the exact excess Σn - Σq
    let mut big_n = vec![0.0; count];
    let mut excess = vec![0i64; count];
    for (id, node) in tree.nodes().collect::<Vec<_>>().into_iter().rev() {
        match node.kind {
            NodeKind::Leaf { coord } => {
                let n = cart.n[coord - 1];
                big_n[id.0] = 2.0 * f64::from(n) + params.signed_k(coord) + 0.5;
                excess[id.0] = i64::from(n);
            }
            NodeKind::Internal { left, right, angle } => {
                big_n[id.0] = big_n[left.0] + big_n[right.0];
                excess[id.0] = excess[left.0] + excess[right.0] - i64::from(hyper.q[angle - 1]);
            }
        }
    }
    tree.internal_nodes()
        .iter()
        .enumerate()
        .map(|(j, &id)| {
            let (left, right) = tree.children(id).expect("internal node");
            Ok(CellData {
                node: id,
                kind: tree.cell_type(id)?,
                ls: momenta.at(left),
                vs: tree.node(left).v,
                lr: momenta.at(right),
                vr: tree.node(right).v,
                ns: big_n[left.0],
                nr: big_n[right.0],
                l: momenta.at(id),
                q: hyper.q[j],
                ms: excess[left.0],
                mr: excess[right.0],
            })
        })
        .collect()
}

/// The six continued-CG arguments of a cell.
pub fn cell_cg_args(cell: &CellData) -> Result<CgArgs> {
    let (vs, vr) = (f64::from(cell.vs), f64::from(cell.vr));
    let half_vs = 0.5 * (vs - 1.0);
    let half_vr = 0.5 * (vr - 1.0);
    let args = CgArgs {
        a: 0.25 * (cell.ls - cell.lr + cell.ns + cell.nr + vs - 1.0),
        b: 0.25 * (cell.lr - cell.ls + cell.ns + cell.nr + vr - 1.0),
        alpha: 0.25 * (cell.lr + cell.ls + cell.ns - cell.nr + vs - 1.0),
        beta: 0.25 * (cell.lr + cell.ls + cell.nr - cell.ns + vr - 1.0),
        c: 0.5 * (cell.l + half_vs + half_vr),
        gamma: 0.5 * (cell.ls + cell.lr + half_vs + half_vr),
    };
    args.structure()?;
    Ok(args)
}

/// `(-1)^{c - a - β} C^{cγ}_{aα;bβ}` for one cell, with `c - a - β = q - m_r`.
pub fn cell_coefficient(cell: &CellData) -> Result<f64> {
    let args = cell_cg_args(cell)?;
    let phase = if (i64::from(cell.q) - cell.mr).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(phase * cg_continued(&args)?)
}

/// Matrix element `W^{N,q}_n` as the product of cell coefficients.
pub fn transition_coefficient(
    tree: &Tree,
    params: &ModelParams,
    cart: &CartesianState,
    hyper: &HypersphericalState,
) -> Result<f64> {
    let mut w = 1.0;
    for cell in collect_cell_data(tree, params, cart, hyper)? {
        if cell.ms < 0 || cell.mr < 0 || cell.excess() < 0 {
            return Ok(0.0);
        }
        w *= cell_coefficient(&cell)?;
    }
    Ok(w)
}

/// Dense matrix with Cartesian states as rows and hyperspherical states as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub n: u32,
    pub rows: Vec<CartesianState>,
    pub cols: Vec<HypersphericalState>,
    /// Row-major.
    pub values: Vec<f64>,
}

impl TransitionMatrix {
    /// Evaluates `entry(row, col)` over the shell-`n` state lists.
    pub fn from_fn<F>(tree: &Tree, n: u32, mut entry: F) -> Result<Self>
    where
        F: FnMut(&CartesianState, &HypersphericalState) -> Result<f64>,
    {
        let rows = enumerate_cartesian(tree.dim(), n);
        let cols = enumerate_hyperspherical(tree, n);
        let mut values = Vec::with_capacity(rows.len() * cols.len());
        for r in &rows {
            for c in &cols {
                values.push(entry(r, c)?);
            }
        }
        Ok(Self { n, rows, cols, values })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let w = self.cols.len();
        &self.values[row * w..(row + 1) * w]
    }

    /// `max |W Wᵀ - I|` and `max |Wᵀ W - I|`, whichever is larger.
    pub fn orthogonality_defect(&self) -> f64 {
        let m = self.size();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let delta = if i == j { 1.0 } else { 0.0 };
                let rows: f64 = (0..m).map(|k| self.get(i, k) * self.get(j, k)).sum();
                let cols: f64 = (0..m).map(|k| self.get(k, i) * self.get(k, j)).sum();
                worst = worst.max(libm::fabs(rows - delta)).max(libm::fabs(cols - delta));
            }
        }
        worst
    }

    /// `selfᵀ · other`, row-major, for two matrices over the same Cartesian rows.
    pub fn transpose_times(&self, other: &TransitionMatrix) -> Vec<f64> {
        let m = self.size();
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = (0..m).map(|k| self.get(k, i) * other.get(k, j)).sum();
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &TransitionMatrix) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max)
    }
}

/// Product-formula matrix for shell `n`.
pub fn transition_matrix(tree: &Tree, params: &ModelParams, n: u32) -> Result<TransitionMatrix> {
    params.check_tree(tree)?;
    TransitionMatrix::from_fn(tree, n, |r, c| transition_coefficient(tree, params, r, c))
}

/// Quadrature settings used by the oracle: relative tolerance 1e-11 per cell.
pub fn oracle_quadrature() -> TanhSinh {
    TanhSinh::relative(DEFAULT_TOL)
}

/// `∫_0^{π/2} cos^{N_s+v_s}θ sin^{N_r+v_r}θ f^l_{l_s,v_s;l_r,v_r}(θ) dθ` with the
/// general (unreduced) cell function.
pub fn general_cell_integral(cell: &CellData, quad: &TanhSinh) -> Result<f64> {
    let pc = cell.ns + f64::from(cell.vs);
    let ps = cell.nr + f64::from(cell.vr);
    quad.integrate_ends(
        |_, d_lo, d_hi| {
            let (c, s) = (libm::sin(d_hi), libm::sin(d_lo));
            libm::pow(c, pc) * libm::pow(s, ps) * cell_function(cell.ls, cell.vs, cell.lr, cell.vr, cell.q, c, s)
        },
        0.0,
        core::f64::consts::FRAC_PI_2,
    )
}

/// `K^{l_s,v_s;l_r,v_r}_{N_s,N_r}`: square root of a Gamma ratio.
pub fn k_constant(cell: &CellData) -> Result<f64> {
    let (vs, vr) = (f64::from(cell.vs), f64::from(cell.vr));
    let lg = |x: f64| log_gamma_signed(x).map(|g| g.log_abs);
    let ln = lg(0.5 * (cell.ns - cell.ls) + 1.0)? + lg(0.5 * (cell.ns + cell.ls) + 0.5 * (vs + 1.0))?
        + lg(0.5 * (cell.nr - cell.lr) + 1.0)?
        + lg(0.5 * (cell.nr + cell.lr) + 0.5 * (vr + 1.0))?
        - lg(0.5 * (cell.nr + cell.ns + cell.l) + 0.5 * (vr + vs) + 1.0)?
        - lg(0.5 * (cell.ns + cell.nr - cell.l) + 1.0)?;
    Ok(libm::exp(0.5 * ln))
}

/// `ln |M|` and the sign `(-1)^{N - n_r}` of the overlap prefactor.
fn overlap_prefactor(params: &ModelParams, cart: &CartesianState, hyper: &HypersphericalState, l: f64) -> (f64, f64) {
    let d = params.dim() as f64;
    let nr = f64::from(hyper.n_r);
    let mut ln = d * LN_2 - 0.5 * LN_2 + 0.5 * (ln_gamma(nr + 1.0) + ln_gamma(nr + l + 0.5 * d));
    for (i, &n) in cart.n.iter().enumerate() {
        let n = f64::from(n);
        ln -= 0.5 * (ln_gamma(n + 1.0) + ln_gamma(n + params.signed_k(i + 1) + 1.0));
    }
    let sign = if (cart.principal() - hyper.n_r) % 2 == 0 { 1.0 } else { -1.0 };
    (ln, sign)
}

/// Matrix element from the overlap integral, with cell integrals by quadrature.
pub fn oracle_transition(
    tree: &Tree,
    params: &ModelParams,
    cart: &CartesianState,
    hyper: &HypersphericalState,
    quad: &TanhSinh,
) -> Result<f64> {
    let mut cache = CellCache::default();
    oracle_entry(tree, params, cart, hyper, quad, &mut cache)
}

type CellKey = (usize, u64, u64, u64, u64, u32);

#[derive(Default)]
struct CellCache {
    map: BTreeMap<CellKey, f64>,
}

fn oracle_entry(
    tree: &Tree,
    params: &ModelParams,
    cart: &CartesianState,
    hyper: &HypersphericalState,
    quad: &TanhSinh,
    cache: &mut CellCache,
) -> Result<f64> {
    let cells = collect_cell_data(tree, params, cart, hyper)?;
    let root_l = cells[0].l;
    let (ln_m, sign) = overlap_prefactor(params, cart, hyper, root_l);
    let mut value = sign * libm::exp(ln_m);
    for cell in &cells {
        let key = (cell.node.0, cell.ls.to_bits(), cell.lr.to_bits(), cell.ns.to_bits(), cell.nr.to_bits(), cell.q);
        let integral = match cache.map.get(&key) {
            Some(&v) => v,
            None => {
                let v = general_cell_integral(cell, quad)?;
                cache.map.insert(key, v);
                v
            }
        };
        value *= cell.leaf_prefactor() * integral;
    }
    Ok(value)
}

/// Oracle matrix for shell `n`; cell integrals shared between entries are computed once.
pub fn oracle_matrix(tree: &Tree, params: &ModelParams, n: u32, quad: &TanhSinh) -> Result<TransitionMatrix> {
    params.check_tree(tree)?;
    let mut cache = CellCache::default();
    TransitionMatrix::from_fn(tree, n, |r, c| oracle_entry(tree, params, r, c, quad, &mut cache))
}

/// Per-column signs `s_j` with `product ≈ s_j · oracle` down every column.
///
/// Fails when the two matrices differ in magnitude beyond `tol` or when no
/// single sign per column reconciles them.
pub fn column_phases(product: &TransitionMatrix, oracle: &TransitionMatrix, tol: f64) -> Result<Vec<i8>> {
    let m = product.size();
    if oracle.size() != m {
        return Err(Error::Domain(format!("matrix sizes differ: {} vs {}", m, oracle.size())));
    }
    let mut phases = Vec::with_capacity(m);
    for j in 0..m {
        let pivot = (0..m)
            .max_by(|&a, &b| libm::fabs(oracle.get(a, j)).total_cmp(&libm::fabs(oracle.get(b, j))))
            .unwrap_or(0);
        let s: i8 = if product.get(pivot, j) * oracle.get(pivot, j) < 0.0 { -1 } else { 1 };
        for i in 0..m {
            let dev = libm::fabs(product.get(i, j) - f64::from(s) * oracle.get(i, j));
            if dev > tol {
                return Err(Error::Domain(format!(
                    "entry ({}, {}) differs by {dev:e} after column phase {s}: product {} vs oracle {}",
                    product.rows[i],
                    product.cols[j],
                    product.get(i, j),
                    oracle.get(i, j)
                )));
            }
        }
        phases.push(s);
    }
    Ok(phases)
}

/// Left and right products of the cell constants `K`, the right one via the
/// per-vertex factors `f(i) = sqrt(Γ((N_i - l_i)/2 + 1) Γ((N_i + l_i)/2 + (v_i + 1)/2))`.
pub fn k_telescoping_check(
    tree: &Tree,
    params: &ModelParams,
    cart: &CartesianState,
    hyper: &HypersphericalState,
) -> Result<(f64, f64)> {
    let cells = collect_cell_data(tree, params, cart, hyper)?;
    if let Some(c) = cells.iter().find(|c| c.ms < 0 || c.mr < 0) {
        return Err(Error::Domain(format!(
            "state pair has a negative subtree excess at node {} (m_s = {}, m_r = {})",
            c.node.0, c.ms, c.mr
        )));
    }
    let mut ln_lhs = 0.0;
    for cell in &cells {
        ln_lhs += libm::log(k_constant(cell)?);
    }
    let d = params.dim() as f64;
    let nr = f64::from(hyper.n_r);
    let l = cells[0].l;
    let mut ln_rhs = -0.5 * (ln_gamma(nr + l + 0.5 * d) + ln_gamma(nr + 1.0));
    for (i, &n) in cart.n.iter().enumerate() {
        let n = f64::from(n);
        ln_rhs += 0.5 * (ln_gamma(n + 1.0) + ln_gamma(n + params.signed_k(i + 1) + 1.0));
    }
    Ok((libm::exp(ln_lhs), libm::exp(ln_rhs)))
}

fn interior_point(tree: &Tree, r: f64, theta: &[f64]) -> Result<Vec<f64>> {
    let x: Vec<f64> = tree.angles_to_unit_vector(theta)?.into_iter().map(|u| r * u).collect();
    if x.iter().any(|&xi| !(xi > 0.0)) {
        return Err(Error::Domain(format!("point (r = {r}, theta = {theta:?}) is not interior to the orthant")));
    }
    Ok(x)
}

/// Both sides of `Ψ_n(x) = Σ_q W Ψ_{n_r,q}(r, θ)`, each scaled by `2^{D/2}` so
/// the two bases are unit-normalized over the orthant.
pub fn expand_pointwise(
    tree: &Tree,
    params: &ModelParams,
    cart: &CartesianState,
    r: f64,
    theta: &[f64],
) -> Result<(f64, f64)> {
    params.check_tree(tree)?;
    let x = interior_point(tree, r, theta)?;
    let scale = libm::pow(SQRT_2, tree.dim() as f64);
    let lhs = scale * cartesian_wavefunction(params, cart, &x)?;
    let mut rhs = 0.0;
    for hyper in enumerate_hyperspherical(tree, cart.principal()) {
        let w = transition_coefficient(tree, params, cart, &hyper)?;
        if w != 0.0 {
            rhs += w * scale * hyperspherical_wavefunction(tree, params, &hyper, r, theta)?;
        }
    }
    Ok((lhs, rhs))
}

/// Inverse direction: `Ψ_{n_r,q}(r, θ)` against `Σ_n W Ψ_n(x)`, same scaling.
pub fn expand_inverse_pointwise(
    tree: &Tree,
    params: &ModelParams,
    hyper: &HypersphericalState,
    r: f64,
    theta: &[f64],
) -> Result<(f64, f64)> {
    params.check_tree(tree)?;
    let x = interior_point(tree, r, theta)?;
    let scale = libm::pow(SQRT_2, tree.dim() as f64);
    let lhs = scale * hyperspherical_wavefunction(tree, params, hyper, r, theta)?;
    let mut rhs = 0.0;
    for cart in enumerate_cartesian(tree.dim(), hyper.principal()) {
        let w = transition_coefficient(tree, params, &cart, hyper)?;
        if w != 0.0 {
            rhs += w * scale * cartesian_wavefunction(params, &cart, &x)?;
        }
    }
    Ok((lhs, rhs))
}
