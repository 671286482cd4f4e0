//! Binary trees encoding polyspherical coordinate systems.
//!
//! Leaves are the Cartesian directions `x1..xD`; every internal node carries
//! one angle. Descending to a left child contributes `cos θ` of the parent's
//! angle, descending to a right child contributes `sin θ`. Angles are numbered
//! `t1..t(D-1)` in depth-first pre-order.
//!
//! Text form: `tree := leaf | "(" tree tree ")"`, `leaf := "x" integer`, with
//! whitespace allowed anywhere between tokens.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::fmt;

use crate::error::{Error, Result};

/// Tolerance on the `[0, π/2]` angle range.
const ANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Cartesian coordinate index, 1-based.
    Leaf { coord: usize },
    /// `angle` is 1-based.
    Internal { left: NodeId, right: NodeId, angle: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    /// Number of internal nodes in the subtree rooted here.
    pub v: u32,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }
}

/// Owned recursive form of a tree, used for construction and serialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeSpec {
    Leaf(usize),
    Pair(Box<TreeSpec>, Box<TreeSpec>),
}

impl TreeSpec {
    pub fn pair(left: TreeSpec, right: TreeSpec) -> Self {
        TreeSpec::Pair(Box::new(left), Box::new(right))
    }
}

/// The four cell shapes, by which children are leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellType {
    /// Both children are leaves.
    A,
    /// Left child is a leaf, right child a subtree.
    B,
    /// Left child is a subtree, right child a leaf.
    C,
    /// Both children are subtrees.
    D,
}

impl CellType {
    /// Number of children that are leaves.
    pub fn leaf_children(self) -> u32 {
        match self {
            CellType::A => 2,
            CellType::B | CellType::C => 1,
            CellType::D => 0,
        }
    }
}

impl fmt::Display for CellType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            CellType::A => "a",
            CellType::B => "b",
            CellType::C => "c",
            CellType::D => "d",
        };
        f.write_str(tag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trig {
    Cos,
    Sin,
}

impl fmt::Display for Trig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trig::Cos => "cos",
            Trig::Sin => "sin",
        })
    }
}

/// Per-leaf list of `(angle index, factor)` along the root-to-leaf path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateMap {
    pub factors: Vec<Vec<(usize, Trig)>>,
}

impl CoordinateMap {
    /// `cos(t1) cos(t2)` style product for coordinate `coord` (1-based).
    pub fn product_string(&self, coord: usize) -> String {
        let mut out = String::new();
        for (i, (angle, trig)) in self.factors[coord - 1].iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&alloc::format!("{trig}(t{angle})"));
        }
        out
    }
}

impl fmt::Display for CoordinateMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for coord in 1..=self.factors.len() {
            writeln!(f, "x{coord} = {}", self.product_string(coord))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    Expected(&'static str),
    TrailingInput,
    BadLeafIndex,
    DuplicateLeaf(usize),
    MissingLeaf(usize),
    TooFewLeaves,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    /// The input with a caret line under the error offset.
    pub fn annotate(&self, input: &str) -> String {
        let mut out = String::from(input);
        out.push('\n');
        let col = input.get(..self.offset).map_or(self.offset, |s| s.chars().count());
        out.extend(core::iter::repeat(' ').take(col));
        out.push('^');
        out
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at offset {}: ", self.offset)?;
        match &self.kind {
            ParseErrorKind::Empty => f.write_str("empty input"),
            ParseErrorKind::Expected(what) => write!(f, "expected {what}"),
            ParseErrorKind::TrailingInput => f.write_str("unexpected input after the tree"),
            ParseErrorKind::BadLeafIndex => f.write_str("leaf index must be a positive integer"),
            ParseErrorKind::DuplicateLeaf(i) => write!(f, "leaf x{i} appears more than once"),
            ParseErrorKind::MissingLeaf(i) => write!(f, "leaf x{i} is missing"),
            ParseErrorKind::TooFewLeaves => f.write_str("a tree needs at least two leaves"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    leaf_offsets: Vec<(usize, usize)>,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { offset: self.pos, kind }
    }

    fn tree(&mut self) -> core::result::Result<TreeSpec, ParseError> {
        self.skip_ws();
        match self.src.get(self.pos) {
            Some(b'(') => {
                self.pos += 1;
                let left = self.tree()?;
                let right = self.tree()?;
                self.skip_ws();
                if self.src.get(self.pos) != Some(&b')') {
                    return Err(self.err(ParseErrorKind::Expected("')'")));
                }
                self.pos += 1;
                Ok(TreeSpec::pair(left, right))
            }
            Some(b'x') => {
                let start = self.pos;
                self.pos += 1;
                let digits = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let text = core::str::from_utf8(&self.src[digits..self.pos]).unwrap_or("");
                match text.parse::<usize>() {
                    Ok(i) if i > 0 => {
                        self.leaf_offsets.push((i, start));
                        Ok(TreeSpec::Leaf(i))
                    }
                    _ => Err(ParseError { offset: digits, kind: ParseErrorKind::BadLeafIndex }),
                }
            }
            _ => Err(self.err(ParseErrorKind::Expected("'(' or a leaf 'x<i>'"))),
        }
    }
}

/// Parses the text form of a tree.
pub fn parse_tree(text: &str) -> Result<Tree> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, leaf_offsets: Vec::new() };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(p.err(ParseErrorKind::Empty).into());
    }
    let spec = p.tree()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err(ParseErrorKind::TrailingInput).into());
    }
    let d = p.leaf_offsets.len();
    if d < 2 {
        return Err(ParseError { offset: 0, kind: ParseErrorKind::TooFewLeaves }.into());
    }
    let mut seen = vec![false; d];
    for &(i, offset) in &p.leaf_offsets {
        if i > d {
            // some index in 1..=d must then be absent; report the first one
            let missing = (1..=d).find(|j| !p.leaf_offsets.iter().any(|(k, _)| k == j)).unwrap_or(d);
            return Err(ParseError { offset: text.len(), kind: ParseErrorKind::MissingLeaf(missing) }.into());
        }
        if seen[i - 1] {
            return Err(ParseError { offset, kind: ParseErrorKind::DuplicateLeaf(i) }.into());
        }
        seen[i - 1] = true;
    }
    Tree::from_spec(&spec)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    /// Nodes in depth-first pre-order; the root is `NodeId(0)`.
    nodes: Vec<Node>,
    /// Internal nodes by angle index (angle `j` at position `j - 1`).
    internals: Vec<NodeId>,
    /// Leaf node of each coordinate (coordinate `i` at position `i - 1`).
    leaves: Vec<NodeId>,
    /// Coordinate indices in left-to-right order.
    leaf_order: Vec<usize>,
}

impl Tree {
    pub fn from_spec(spec: &TreeSpec) -> Result<Self> {
        let mut tree = Tree { nodes: Vec::new(), internals: Vec::new(), leaves: Vec::new(), leaf_order: Vec::new() };
        tree.push(spec);
        let d = tree.leaf_order.len();
        if d < 2 {
            return Err(Error::InvalidTree("a tree needs at least two leaves".into()));
        }
        let mut leaves = vec![None; d];
        for (id, node) in tree.nodes.iter().enumerate() {
            if let NodeKind::Leaf { coord } = node.kind {
                if coord == 0 || coord > d {
                    return Err(Error::InvalidTree(alloc::format!("leaf x{coord} outside x1..x{d}")));
                }
                if leaves[coord - 1].replace(NodeId(id)).is_some() {
                    return Err(Error::InvalidTree(alloc::format!("leaf x{coord} appears more than once")));
                }
            }
        }
        tree.leaves = leaves.into_iter().map(|l| l.expect("d distinct leaves in 1..=d")).collect();
        Ok(tree)
    }

    fn push(&mut self, spec: &TreeSpec) -> NodeId {
        let id = NodeId(self.nodes.len());
        match spec {
            TreeSpec::Leaf(coord) => {
                self.nodes.push(Node { kind: NodeKind::Leaf { coord: *coord }, v: 0 });
                self.leaf_order.push(*coord);
            }
            TreeSpec::Pair(l, r) => {
                self.internals.push(id);
                let angle = self.internals.len();
                // placeholder, patched once both children exist
                self.nodes.push(Node { kind: NodeKind::Leaf { coord: 0 }, v: 0 });
                let left = self.push(l);
                let right = self.push(r);
                let v = self.nodes[left.0].v + self.nodes[right.0].v + 1;
                self.nodes[id.0] = Node { kind: NodeKind::Internal { left, right, angle }, v };
            }
        }
        id
    }

    /// All trees with leaves `x1..xd` in left-to-right order.
    pub fn all_shapes(d: usize) -> Vec<Tree> {
        fn build(lo: usize, hi: usize) -> Vec<TreeSpec> {
            if lo == hi {
                return vec![TreeSpec::Leaf(lo)];
            }
            let mut out = Vec::new();
            for split in lo..hi {
                for l in build(lo, split) {
                    for r in build(split + 1, hi) {
                        out.push(TreeSpec::pair(l.clone(), r));
                    }
                }
            }
            out
        }
        if d < 2 {
            return Vec::new();
        }
        build(1, d).iter().map(|s| Tree::from_spec(s).expect("generated shapes are valid")).collect()
    }

    /// Number of leaves `D`.
    pub fn dim(&self) -> usize {
        self.leaves.len()
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    /// Internal nodes ordered by angle index.
    pub fn internal_nodes(&self) -> &[NodeId] {
        &self.internals
    }

    pub fn leaf(&self, coord: usize) -> NodeId {
        self.leaves[coord - 1]
    }

    pub fn leaf_order(&self) -> &[usize] {
        &self.leaf_order
    }

    pub fn children(&self, id: NodeId) -> Option<(NodeId, NodeId)> {
        match self.nodes[id.0].kind {
            NodeKind::Internal { left, right, .. } => Some((left, right)),
            NodeKind::Leaf { .. } => None,
        }
    }

    /// 1-based angle index of an internal node.
    pub fn angle_of(&self, id: NodeId) -> Option<usize> {
        match self.nodes[id.0].kind {
            NodeKind::Internal { angle, .. } => Some(angle),
            NodeKind::Leaf { .. } => None,
        }
    }

    /// Coordinates of the leaves below `id`, left to right.
    pub fn leaves_under(&self, id: NodeId) -> &[usize] {
        // pre-order storage: a subtree's leaves are contiguous in leaf_order
        let before = self.nodes[..id.0].iter().filter(|n| n.is_leaf()).count();
        let count = self.nodes[id.0].v as usize + 1;
        &self.leaf_order[before..before + count]
    }

    pub fn cell_type(&self, id: NodeId) -> Result<CellType> {
        let (l, r) = self
            .children(id)
            .ok_or_else(|| Error::InvalidTree(alloc::format!("node {} is a leaf, not a cell", id.0)))?;
        Ok(match (self.node(l).is_leaf(), self.node(r).is_leaf()) {
            (true, true) => CellType::A,
            (true, false) => CellType::B,
            (false, true) => CellType::C,
            (false, false) => CellType::D,
        })
    }

    pub fn coordinate_map(&self) -> CoordinateMap {
        let mut factors = vec![Vec::new(); self.dim()];
        let mut path = Vec::new();
        self.walk_paths(self.root(), &mut path, &mut factors);
        CoordinateMap { factors }
    }

    fn walk_paths(&self, id: NodeId, path: &mut Vec<(usize, Trig)>, out: &mut [Vec<(usize, Trig)>]) {
        match self.nodes[id.0].kind {
            NodeKind::Leaf { coord } => out[coord - 1] = path.clone(),
            NodeKind::Internal { left, right, angle } => {
                path.push((angle, Trig::Cos));
                self.walk_paths(left, path, out);
                path.pop();
                path.push((angle, Trig::Sin));
                self.walk_paths(right, path, out);
                path.pop();
            }
        }
    }

    /// Unit-sphere point `(x̃_1, ..., x̃_D)` for angles `theta[j-1] = t_j`, each in `[0, π/2]`.
    pub fn angles_to_unit_vector(&self, theta: &[f64]) -> Result<Vec<f64>> {
        check_angles(self, theta)?;
        let mut out = vec![0.0; self.dim()];
        self.fill_unit(self.root(), 1.0, theta, &mut out);
        Ok(out)
    }

    fn fill_unit(&self, id: NodeId, acc: f64, theta: &[f64], out: &mut [f64]) {
        match self.nodes[id.0].kind {
            NodeKind::Leaf { coord } => out[coord - 1] = acc,
            NodeKind::Internal { left, right, angle } => {
                let t = theta[angle - 1];
                self.fill_unit(left, acc * libm::cos(t), theta, out);
                self.fill_unit(right, acc * libm::sin(t), theta, out);
            }
        }
    }

    pub fn to_spec(&self) -> TreeSpec {
        self.spec_at(self.root())
    }

    fn spec_at(&self, id: NodeId) -> TreeSpec {
        match self.nodes[id.0].kind {
            NodeKind::Leaf { coord } => TreeSpec::Leaf(coord),
            NodeKind::Internal { left, right, .. } => TreeSpec::pair(self.spec_at(left), self.spec_at(right)),
        }
    }

    fn render_at(&self, id: NodeId, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.nodes[id.0].kind {
            NodeKind::Leaf { coord } => write!(f, "x{coord}"),
            NodeKind::Internal { left, right, .. } => {
                f.write_str("(")?;
                self.render_at(left, f)?;
                f.write_str(" ")?;
                self.render_at(right, f)?;
                f.write_str(")")
            }
        }
    }
}

/// Renders the text form accepted by [`parse_tree`].
impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.render_at(self.root(), f)
    }
}

pub(crate) fn check_angles(tree: &Tree, theta: &[f64]) -> Result<()> {
    if theta.len() != tree.dim() - 1 {
        return Err(Error::Domain(alloc::format!(
            "expected {} angles, got {}",
            tree.dim() - 1,
            theta.len()
        )));
    }
    for (j, &t) in theta.iter().enumerate() {
        if !(-ANGLE_SLACK..=FRAC_PI_2 + ANGLE_SLACK).contains(&t) {
            return Err(Error::Domain(alloc::format!("angle t{} = {t} outside [0, pi/2]", j + 1)));
        }
    }
    Ok(())
}
