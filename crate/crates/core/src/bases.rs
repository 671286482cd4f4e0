//! Cartesian and hyperspherical eigenbases of the singular oscillator
//!
//! `V = ½ Σ_i (Ω² x_i² + (k_i² - ¼)/x_i²)` on the positive orthant.
//!
//! Both bases carry the same normalization: the Cartesian product functions
//! integrate to `2^{-D}` over the orthant, and so do the hyperspherical
//! functions, whose leaf cells carry the `1/√2` per-leaf factors. Both are
//! therefore unit-normalized on the whole space after even extension, and the
//! transition matrix between them is orthogonal.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, LN_2};
use core::fmt;

use crate::error::{Error, Result};
use crate::special::{jacobi, laguerre, ln_gamma};
use crate::tree::{check_angles, NodeId, NodeKind, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Frequency `Ω`, strengths `k_i` and the branch `±k_i` chosen per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    omega: f64,
    k: Vec<f64>,
    signs: Vec<Sign>,
}

impl ModelParams {
    pub fn new(omega: f64, k: Vec<f64>, signs: Vec<Sign>) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParams(format!("omega must be positive, got {omega}")));
        }
        if k.len() < 2 {
            return Err(Error::InvalidParams(format!("need D >= 2 strengths, got {}", k.len())));
        }
        if k.len() != signs.len() {
            return Err(Error::InvalidParams(format!(
                "{} strengths but {} signs",
                k.len(),
                signs.len()
            )));
        }
        for (i, (&ki, &si)) in k.iter().zip(&signs).enumerate() {
            if !(ki.is_finite() && ki > 0.0) {
                return Err(Error::InvalidParams(format!("k{} must be positive, got {ki}", i + 1)));
            }
            if si == Sign::Minus && ki > 0.5 {
                return Err(Error::InvalidParams(format!(
                    "k{} = {ki} > 1/2 only admits the + branch",
                    i + 1
                )));
            }
        }
        Ok(Self { omega, k, signs })
    }

    /// All `+` branches.
    pub fn plus(omega: f64, k: Vec<f64>) -> Result<Self> {
        let signs = vec![Sign::Plus; k.len()];
        Self::new(omega, k, signs)
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    /// `±k_i` for coordinate `i` (1-based); the Laguerre index of that axis.
    pub fn signed_k(&self, coord: usize) -> f64 {
        self.signs[coord - 1].value() * self.k[coord - 1]
    }

    /// Leaf momentum `½ ± k_i`.
    pub fn leaf_momentum(&self, coord: usize) -> f64 {
        0.5 + self.signed_k(coord)
    }

    pub fn check_tree(&self, tree: &Tree) -> Result<()> {
        if tree.dim() != self.dim() {
            return Err(Error::InvalidParams(format!(
                "tree has {} leaves but {} strengths were given",
                tree.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `E = Ω (2N + D + Σ ±k_i)`.
pub fn energy(params: &ModelParams, n: u32) -> f64 {
    let sum: f64 = (1..=params.dim()).map(|i| params.signed_k(i)).sum();
    params.omega * (2.0 * f64::from(n) + params.dim() as f64 + sum)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CartesianState {
    pub n: Vec<u32>,
}

impl CartesianState {
    pub fn new(n: Vec<u32>) -> Self {
        Self { n }
    }

    pub fn principal(&self) -> u32 {
        self.n.iter().sum()
    }
}

impl fmt::Display for CartesianState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, n) in self.n.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(")")
    }
}

/// Radial number `n_r` and one `q` per internal node, indexed by angle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HypersphericalState {
    pub n_r: u32,
    pub q: Vec<u32>,
}

impl HypersphericalState {
    pub fn new(n_r: u32, q: Vec<u32>) -> Self {
        Self { n_r, q }
    }

    pub fn principal(&self) -> u32 {
        self.n_r + self.q.iter().sum::<u32>()
    }
}

/// Formats as `(n_r;q1,q2,...)`.
impl fmt::Display for HypersphericalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.n_r)?;
        for (i, q) in self.q.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{q}")?;
        }
        f.write_str(")")
    }
}

/// Separation constant at every vertex of a tree, indexed by `NodeId`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMomenta {
    pub l: Vec<f64>,
}

impl NodeMomenta {
    pub fn at(&self, id: NodeId) -> f64 {
        self.l[id.0]
    }

    /// Hypermomentum of the root.
    pub fn root(&self) -> f64 {
        self.l[0]
    }
}

fn check_hyper(tree: &Tree, state: &HypersphericalState) -> Result<()> {
    if state.q.len() != tree.dim() - 1 {
        return Err(Error::InvalidParams(format!(
            "hyperspherical state has {} q values, tree has {} nodes",
            state.q.len(),
            tree.dim() - 1
        )));
    }
    Ok(())
}

/// Leaves get `½ ± k_i`; an internal node gets `2q + l_left + l_right`.
pub fn node_momenta(tree: &Tree, params: &ModelParams, state: &HypersphericalState) -> Result<NodeMomenta> {
    params.check_tree(tree)?;
    check_hyper(tree, state)?;
    let mut l = vec![0.0; tree.nodes().count()];
    // children follow their parent in pre-order, so a reverse sweep is bottom-up
    for (id, node) in tree.nodes().collect::<Vec<_>>().into_iter().rev() {
        l[id.0] = match node.kind {
            NodeKind::Leaf { coord } => params.leaf_momentum(coord),
            NodeKind::Internal { left, right, angle } => 2.0 * f64::from(state.q[angle - 1]) + l[left.0] + l[right.0],
        };
    }
    Ok(NodeMomenta { l })
}

/// One axis factor `ψ_n(x, ±k)` of the Cartesian basis.
pub fn cartesian_factor(omega: f64, n: u32, signed_k: f64, x: f64) -> f64 {
    let y = omega * x * x;
    let log_norm = 0.5 * (0.5 * libm::log(omega) + ln_gamma(f64::from(n) + 1.0) - ln_gamma(f64::from(n) + signed_k + 1.0));
    let log_mag = log_norm - 0.5 * y + 0.5 * (0.5 + signed_k) * libm::log(y);
    libm::exp(log_mag) * laguerre(n, signed_k, y)
}

pub fn cartesian_wavefunction(params: &ModelParams, state: &CartesianState, x: &[f64]) -> Result<f64> {
    if state.n.len() != params.dim() || x.len() != params.dim() {
        return Err(Error::Domain(format!(
            "expected {} quantum numbers and coordinates, got {} and {}",
            params.dim(),
            state.n.len(),
            x.len()
        )));
    }
    if let Some(bad) = x.iter().find(|&&xi| !(xi > 0.0 && xi.is_finite())) {
        return Err(Error::Domain(format!("cartesian coordinates must be positive, got {bad}")));
    }
    Ok(state
        .n
        .iter()
        .zip(x)
        .enumerate()
        .map(|(i, (&n, &xi))| cartesian_factor(params.omega, n, params.signed_k(i + 1), xi))
        .product())
}

/// `ln N_q^{(α,β)}` of the angular normalization constant.
fn ln_cell_norm(q: u32, alpha: f64, beta: f64) -> f64 {
    let qf = f64::from(q);
    0.5 * (LN_2 + libm::log(2.0 * qf + alpha + beta + 1.0) + ln_gamma(qf + 1.0) + ln_gamma(qf + alpha + beta + 1.0)
        - ln_gamma(qf + alpha + 1.0)
        - ln_gamma(qf + beta + 1.0))
}

/// General cell solution `f^l_{l_s,v_s;l_r,v_r}(θ)` with `l = 2q + l_s + l_r`.
///
/// Orthonormal on `[0, π/2]` under the weight `cos^{v_s}θ sin^{v_r}θ`. The
/// trigonometric values are passed in so that callers near an endpoint can
/// supply them without cancellation.
pub fn cell_function(ls: f64, vs: u32, lr: f64, vr: u32, q: u32, cos_t: f64, sin_t: f64) -> f64 {
    let alpha_s = ls + 0.5 * (f64::from(vs) - 1.0);
    let alpha_r = lr + 0.5 * (f64::from(vr) - 1.0);
    let x = (cos_t - sin_t) * (cos_t + sin_t);
    let log_mag = ln_cell_norm(q, alpha_s, alpha_r) + ls * libm::log(cos_t) + lr * libm::log(sin_t);
    libm::exp(log_mag) * jacobi(q, alpha_r, alpha_s, x)
}

/// Ingredients of one cell's angular factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CellMomenta {
    pub ls: f64,
    pub vs: u32,
    pub lr: f64,
    pub vr: u32,
    pub q: u32,
    /// `2^{-(leaf children)/2}`.
    pub prefactor: f64,
}

pub(crate) fn cell_momenta(tree: &Tree, momenta: &NodeMomenta, state: &HypersphericalState, id: NodeId) -> CellMomenta {
    let (left, right) = tree.children(id).expect("cell_momenta on an internal node");
    let angle = tree.angle_of(id).expect("internal node has an angle");
    let (ln, rn) = (tree.node(left), tree.node(right));
    let leaf_children = i32::from(ln.is_leaf()) + i32::from(rn.is_leaf());
    CellMomenta {
        ls: momenta.at(left),
        vs: ln.v,
        lr: momenta.at(right),
        vr: rn.v,
        q: state.q[angle - 1],
        prefactor: libm::pow(FRAC_1_SQRT_2, f64::from(leaf_children)),
    }
}

/// `Y(θ)`: product over cells, leaf cells scaled by `1/√2` per leaf child.
pub fn angular_function(tree: &Tree, params: &ModelParams, state: &HypersphericalState, theta: &[f64]) -> Result<f64> {
    check_angles(tree, theta)?;
    let momenta = node_momenta(tree, params, state)?;
    Ok(tree
        .internal_nodes()
        .iter()
        .enumerate()
        .map(|(j, &id)| {
            let c = cell_momenta(tree, &momenta, state, id);
            let t = theta[j];
            c.prefactor * cell_function(c.ls, c.vs, c.lr, c.vr, c.q, libm::cos(t), libm::sin(t))
        })
        .product())
}

/// `R_{n_r l}(r)` in dimension `dim`, orthonormal under `r^{D-1} dr`.
pub fn radial_function(omega: f64, dim: usize, l: f64, n_r: u32, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if !(l > 0.0) {
        return Err(Error::Domain(format!("hypermomentum must be positive, got {l}")));
    }
    let half_d = 0.5 * dim as f64;
    let nr = f64::from(n_r);
    let y = omega * r * r;
    let log_norm = 0.5 * (LN_2 + (l + half_d) * libm::log(omega) + ln_gamma(nr + 1.0) - ln_gamma(nr + l + half_d));
    let log_mag = log_norm - 0.5 * y + l * libm::log(r);
    Ok(libm::exp(log_mag) * laguerre(n_r, l + half_d - 1.0, y))
}

/// `Ψ = R_{n_r l}(r) Y(θ)` with `l` the root hypermomentum.
pub fn hyperspherical_wavefunction(
    tree: &Tree,
    params: &ModelParams,
    state: &HypersphericalState,
    r: f64,
    theta: &[f64],
) -> Result<f64> {
    let l = node_momenta(tree, params, state)?.root();
    let radial = radial_function(params.omega, params.dim(), l, state.n_r, r)?;
    Ok(radial * angular_function(tree, params, state, theta)?)
}

/// Compositions of `n` into `dim` parts, lexicographically ascending.
pub fn enumerate_cartesian(dim: usize, n: u32) -> Vec<CartesianState> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; dim];
    compositions(&mut cur, 0, n, &mut |c| out.push(CartesianState::new(c.to_vec())));
    out
}

/// Weak compositions with exact total, visited in lexicographic order.
fn compositions(cur: &mut [u32], pos: usize, remaining: u32, visit: &mut dyn FnMut(&[u32])) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        visit(cur);
        return;
    }
    for v in 0..=remaining {
        cur[pos] = v;
        compositions(cur, pos + 1, remaining - v, visit);
    }
}

/// All `(n_r, q)` with `n_r + Σq = n`, ordered lexicographically by `q`.
pub fn enumerate_hyperspherical(tree: &Tree, n: u32) -> Vec<HypersphericalState> {
    let nodes = tree.dim() - 1;
    let mut out = Vec::new();
    // compositions over (q_1..q_{D-1}, n_r) with n_r last
    let mut cur = vec![0u32; nodes + 1];
    compositions(&mut cur, 0, n, &mut |c| out.push(HypersphericalState::new(c[nodes], c[..nodes].to_vec())));
    out
}

/// `C(n + d - 1, d - 1)`, the shell degeneracy.
pub fn shell_size(dim: usize, n: u32) -> usize {
    let (top, k) = (n as usize + dim - 1, dim - 1);
    (0..k).fold(1usize, |acc, i| acc * (top - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::TanhSinh;
    use crate::tree::parse_tree;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, vec![0.3, 0.7], vec![Sign::Minus, Sign::Plus]).is_ok());
        assert!(ModelParams::new(1.0, vec![0.3, 0.7], vec![Sign::Plus, Sign::Minus]).is_err());
        assert!(ModelParams::new(1.0, vec![0.5, 0.5], vec![Sign::Minus, Sign::Minus]).is_ok());
        assert!(ModelParams::new(0.0, vec![0.3, 0.7], vec![Sign::Plus; 2]).is_err());
        assert!(ModelParams::new(1.0, vec![0.3, -0.7], vec![Sign::Plus; 2]).is_err());
        assert!(ModelParams::new(1.0, vec![0.3, 0.7], vec![Sign::Plus; 3]).is_err());
        assert!(ModelParams::new(1.0, vec![0.3], vec![Sign::Plus]).is_err());
    }

    #[test]
    fn energies() {
        let p = ModelParams::plus(1.0, vec![0.5, 0.5]).unwrap();
        assert!(close(energy(&p, 0), 3.0, 1e-15));
        let p = ModelParams::new(2.0, vec![0.3, 0.7, 1.2], vec![Sign::Minus, Sign::Plus, Sign::Plus]).unwrap();
        assert!(close(energy(&p, 2), 2.0 * 8.6, 1e-14));
        let p = ModelParams::plus(1.7, vec![0.4, 0.9, 2.2, 0.6]).unwrap();
        assert!((energy(&p, 0) - 1.7 * (4.0 + 0.4 + 0.9 + 2.2 + 0.6)).abs() < 1e-13);
    }

    #[test]
    fn enumerations() {
        let c = enumerate_cartesian(2, 1);
        assert_eq!(c, vec![CartesianState::new(vec![0, 1]), CartesianState::new(vec![1, 0])]);
        assert_eq!(enumerate_cartesian(3, 2).len(), 6);
        assert_eq!(enumerate_cartesian(6, 3).len(), 56);

        let t2 = parse_tree("(x1 x2)").unwrap();
        let h = enumerate_hyperspherical(&t2, 1);
        assert_eq!(h, vec![HypersphericalState::new(1, vec![0]), HypersphericalState::new(0, vec![1])]);
        let t3 = parse_tree("((x1 x2) x3)").unwrap();
        assert_eq!(enumerate_hyperspherical(&t3, 2).len(), 6);
        assert_eq!(enumerate_hyperspherical(&t3, 0), vec![HypersphericalState::new(0, vec![0, 0])]);
        assert_eq!(shell_size(6, 3), 56);
        assert_eq!(shell_size(2, 5), 6);
    }

    #[test]
    fn momenta_examples() {
        let t = parse_tree("(x1 x2)").unwrap();
        let p = ModelParams::plus(1.0, vec![0.3, 0.4]).unwrap();
        let m = node_momenta(&t, &p, &HypersphericalState::new(0, vec![0])).unwrap();
        assert!(close(m.at(t.leaf(1)), 0.8, 1e-15) && close(m.at(t.leaf(2)), 0.9, 1e-15));
        assert!(close(m.root(), 1.7, 1e-15));
        let m = node_momenta(&t, &p, &HypersphericalState::new(0, vec![2])).unwrap();
        assert!(close(m.root(), 5.7, 1e-15));

        let six = parse_tree("((x1 (x2 x3)) ((x4 x5) x6))").unwrap();
        let p = ModelParams::plus(1.0, vec![0.5; 6]).unwrap();
        let m = node_momenta(&six, &p, &HypersphericalState::new(0, vec![0; 5])).unwrap();
        assert_eq!(m.root(), 6.0);
    }

    #[test]
    fn general_cell_is_normalized_on_the_quarter() {
        // leaf-leaf cell with q = 0: f ∝ cos^0.8 sin^0.9
        let ts = TanhSinh::new(1e-13);
        for (ls, vs, lr, vr, q) in [(0.8, 0, 0.9, 0, 0), (0.8, 0, 0.9, 0, 3), (2.7, 2, 0.35, 0, 2), (1.1, 1, 3.4, 3, 1)] {
            let norm = ts
                .integrate_ends(
                    |t, _, d_hi| {
                        let (c, s) = (libm::sin(d_hi), libm::sin(t));
                        let f = cell_function(ls, vs, lr, vr, q, c, s);
                        f * f * libm::pow(c, f64::from(vs)) * libm::pow(s, f64::from(vr))
                    },
                    0.0,
                    FRAC_PI_2,
                )
                .unwrap();
            assert!((norm - 1.0).abs() < 1e-10, "{ls} {vs} {lr} {vr} {q}: {norm}");
        }
    }

    #[test]
    fn q_zero_cell_has_no_jacobi_factor() {
        let (ls, lr) = (0.8, 0.9);
        let t: f64 = 0.6;
        let f = cell_function(ls, 0, lr, 0, 0, libm::cos(t), libm::sin(t));
        let g = cell_function(ls, 0, lr, 0, 0, libm::cos(0.2), libm::sin(0.2));
        let shape = |t: f64| libm::pow(libm::cos(t), ls) * libm::pow(libm::sin(t), lr);
        assert!(close(f / g, shape(t) / shape(0.2), 1e-14));
    }

    #[test]
    fn cartesian_ground_state_half_norm() {
        let ts = TanhSinh::new(1e-13);
        let v = ts.integrate_semi_infinite(|x| cartesian_factor(1.0, 0, 0.5, x).powi(2), 0.0).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        // odd oscillator ground state sqrt(2/sqrt(pi)) x e^{-x²/2}
        let x: f64 = 0.7;
        let expect = libm::sqrt(2.0 / libm::sqrt(PI)) * x * libm::exp(-0.5 * x * x);
        assert!(close(cartesian_factor(1.0, 0, 0.5, x), expect, 1e-14));
        assert!(cartesian_factor(1.0, 2, 0.3, 1e-8).abs() < 1e-5);
    }

    #[test]
    fn cartesian_matches_direct_formula() {
        let p = ModelParams::plus(1.5, vec![0.8, 0.3]).unwrap();
        let x = [0.9, 1.1];
        let got = cartesian_wavefunction(&p, &CartesianState::new(vec![1, 0]), &x).unwrap();
        let gamma = |z: f64| libm::tgamma(z);
        let psi = |n: u32, k: f64, x: f64| {
            let y = 1.5 * x * x;
            let nf = f64::from(n);
            // L_1^k(y) = 1 + k - y, L_0 = 1
            let lag = if n == 0 { 1.0 } else { 1.0 + k - y };
            libm::sqrt(libm::sqrt(1.5) * gamma(nf + 1.0) / gamma(nf + k + 1.0))
                * libm::exp(-0.5 * y)
                * libm::pow(libm::sqrt(y), 0.5 + k)
                * lag
        };
        let expect = psi(1, 0.8, 0.9) * psi(0, 0.3, 1.1);
        assert!(close(got, expect, 1e-12), "{got} vs {expect}");
        assert!(cartesian_wavefunction(&p, &CartesianState::new(vec![1, 0]), &[0.0, 1.0]).is_err());
    }

    #[test]
    fn radial_normalization_and_limits() {
        let ts = TanhSinh::new(1e-13);
        let (omega, d, l, nr) = (1.3, 3usize, 1.7, 2u32);
        let norm = ts
            .integrate_semi_infinite(
                |r| {
                    if r == 0.0 {
                        return 0.0;
                    }
                    let v = radial_function(omega, d, l, nr, r).unwrap();
                    v * v * libm::pow(r, d as f64 - 1.0)
                },
                0.0,
            )
            .unwrap();
        assert!((norm - 1.0).abs() < 1e-10, "{norm}");
        let a = radial_function(omega, d, l, 0, 0.5).unwrap() / (libm::exp(-0.5 * omega * 0.25) * libm::pow(0.5, l));
        let b = radial_function(omega, d, l, 0, 1.9).unwrap() / (libm::exp(-0.5 * omega * 3.61) * libm::pow(1.9, l));
        assert!(close(a, b, 1e-13));
        assert!(radial_function(omega, d, l, 3, 1e-9).unwrap().abs() < 1e-12);
        assert!(radial_function(omega, d, l, 3, 0.0).is_err());
    }

    #[test]
    fn hyperspherical_is_separable() {
        let t = parse_tree("((x1 x2) x3)").unwrap();
        let p = ModelParams::new(1.1, vec![0.3, 0.7, 1.2], vec![Sign::Minus, Sign::Plus, Sign::Plus]).unwrap();
        let s = HypersphericalState::new(1, vec![1, 0]);
        let r = 0.8;
        for th in [[0.3, 0.4], [1.0, 0.2], [0.7, 1.4]] {
            let psi = hyperspherical_wavefunction(&t, &p, &s, r, &th).unwrap();
            let y = angular_function(&t, &p, &s, &th).unwrap();
            let l = node_momenta(&t, &p, &s).unwrap().root();
            assert!(close(psi / y, radial_function(1.1, 3, l, 1, r).unwrap(), 1e-13));
        }
        assert!(angular_function(&t, &p, &s, &[0.3, 2.0]).is_err());
    }
}
