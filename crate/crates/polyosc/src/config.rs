//! Run configuration shared by the CLI commands, plus parsers for the
//! comma-separated lists and state tuples they accept.

use polyosc_core::bases::{CartesianState, HypersphericalState, ModelParams, Sign};
use polyosc_core::tree::Tree;

use crate::error::{CliError, Result};
use crate::tree_json::load_tree;

pub const DEFAULT_TREE: &str = "(x1 x2)";
pub const DEFAULT_K: f64 = 0.5;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    /// Human-readable lines; matrices fall back to CSV.
    Text,
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Input(format!("unknown format '{other}', expected text, csv or json"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// DSL text, JSON text or a file path.
    pub tree: String,
    pub omega: f64,
    /// `None` means `k_i = 1/2` on every leaf.
    pub k: Option<Vec<f64>>,
    /// `None` means `+` on every leaf.
    pub signs: Option<Vec<Sign>>,
    pub n: u32,
    pub tol: f64,
    pub format: Format,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tree: DEFAULT_TREE.into(),
            omega: 1.0,
            k: None,
            signs: None,
            n: 1,
            tol: DEFAULT_TOL,
            format: Format::Csv,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load_tree(&self) -> Result<Tree> {
        load_tree(&self.tree)
    }

    /// The tree and validated model parameters; list lengths must match the leaf count.
    pub fn load(&self) -> Result<(Tree, ModelParams)> {
        let tree = self.load_tree()?;
        let d = tree.dim();
        let k = self.k.clone().unwrap_or_else(|| vec![DEFAULT_K; d]);
        if k.len() != d {
            return Err(CliError::Input(format!("--k has {} entries but the tree has {d} leaves", k.len())));
        }
        let signs = self.signs.clone().unwrap_or_else(|| vec![Sign::Plus; d]);
        if signs.len() != d {
            return Err(CliError::Input(format!("--signs has {} entries but the tree has {d} leaves", signs.len())));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Input(format!("--tol must be positive, got {}", self.tol)));
        }
        let params = ModelParams::new(self.omega, k, signs)?;
        params.check_tree(&tree)?;
        Ok((tree, params))
    }
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.trim()
        .trim_start_matches(['(', '['])
        .trim_end_matches([')', ']'])
        .split(',')
        .map(str::trim)
}

pub fn parse_reals(text: &str, what: &str) -> Result<Vec<f64>> {
    split_list(text)
        .map(|s| s.parse::<f64>().map_err(|_| CliError::Input(format!("{what}: '{s}' is not a number"))))
        .collect()
}

pub fn parse_signs(text: &str) -> Result<Vec<Sign>> {
    split_list(text)
        .map(|s| match s {
            "+" | "+1" | "plus" => Ok(Sign::Plus),
            "-" | "-1" | "minus" => Ok(Sign::Minus),
            other => Err(CliError::Input(format!("--signs: '{other}' is not + or -"))),
        })
        .collect()
}

fn parse_counts(text: &str, what: &str) -> Result<Vec<u32>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(str::trim)
        .map(|s| s.parse::<u32>().map_err(|_| CliError::Input(format!("{what}: '{s}' is not a nonnegative integer"))))
        .collect()
}

/// `"1,0,2"` or `"(1,0,2)"`.
pub fn parse_cartesian_state(text: &str) -> Result<CartesianState> {
    let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
    Ok(CartesianState::new(parse_counts(inner, "cartesian state")?))
}

/// `"n_r;q1,q2"` or `"(n_r;q1,q2)"`.
pub fn parse_hyperspherical_state(text: &str) -> Result<HypersphericalState> {
    let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
    let (nr, q) = inner
        .split_once(';')
        .ok_or_else(|| CliError::Input(format!("hyperspherical state '{text}' must look like 'n_r;q1,q2,...'")))?;
    let nr = nr
        .trim()
        .parse::<u32>()
        .map_err(|_| CliError::Input(format!("hyperspherical state: '{}' is not a nonnegative integer", nr.trim())))?;
    Ok(HypersphericalState::new(nr, parse_counts(q, "hyperspherical state")?))
}
