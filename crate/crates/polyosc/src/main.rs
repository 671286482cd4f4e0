use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyosc::assemble::{assemble, thread_cap};
use polyosc::config::{
    parse_cartesian_state, parse_hyperspherical_state, parse_reals, parse_signs, Format, RunConfig, DEFAULT_TOL,
    DEFAULT_TREE,
};
use polyosc::error::{CliError, Result};
use polyosc::matrix_io::{MatrixDocument, Method};
use polyosc::tree_json::tree_to_json;
use polyosc::verify::verify;
use polyosc_core::bases::{
    angular_function, cartesian_wavefunction, node_momenta, radial_function, ModelParams,
};
use polyosc_core::cg::{cg_continued, CgArgs};
use polyosc_core::transition::{cell_cg_args, cell_coefficient, collect_cell_data};
use polyosc_core::tree::{NodeKind, Tree};

/// Cartesian/hyperspherical transition matrices of the singular oscillator.
///
/// Angles t1..t(D-1) are numbered in depth-first pre-order over the tree's
/// internal nodes, so ((x1 (x2 x3)) ((x4 x5) x6)) gives t1 at the root, t2 and
/// t3 on the left, t4 and t5 on the right.
#[derive(Parser, Debug)]
#[command(name = "polyosc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print each coordinate as a product of cosines and sines.
    Tree(TreeCmd),
    /// Emit the transition matrix for one shell.
    Matrix(MatrixCmd),
    /// Run orthogonality, oracle, telescoping and pointwise checks.
    Verify(VerifyCmd),
    /// Evaluate a basis function at a point.
    Eval(EvalCmd),
    /// Print the per-cell Clebsch-Gordan breakdown of one matrix element.
    Cg(CgCmd),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Tree as DSL text, JSON text, or a file holding either.
    #[arg(long, default_value = DEFAULT_TREE)]
    tree: String,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Comma-separated strengths k_i; defaults to 1/2 on every leaf.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Comma-separated branches, e.g. "+,-,+"; defaults to all +.
    #[arg(long, allow_hyphen_values = true)]
    signs: Option<String>,
    /// Principal quantum number.
    #[arg(long = "N", default_value_t = 1)]
    n: u32,
}

impl ModelArgs {
    fn config(&self) -> Result<RunConfig> {
        Ok(RunConfig {
            tree: self.tree.clone(),
            omega: self.omega,
            k: self.k.as_deref().map(|s| parse_reals(s, "--k")).transpose()?,
            signs: self.signs.as_deref().map(parse_signs).transpose()?,
            n: self.n,
            ..RunConfig::default()
        })
    }
}

#[derive(Args, Debug)]
struct OutArgs {
    /// text, csv or json.
    #[arg(long, default_value = "text")]
    format: String,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArgs {
    fn format(&self) -> Result<Format> {
        self.format.parse()
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Args, Debug)]
struct TreeCmd {
    #[arg(long, default_value = DEFAULT_TREE)]
    tree: String,
    /// Also list the cell type of every angle.
    #[arg(long)]
    cells: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct MatrixCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "product")]
    method: String,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct VerifyCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Basis {
    Cartesian,
    Hyper,
}

#[derive(Args, Debug)]
struct EvalCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum)]
    basis: Basis,
    /// "n1,n2,..." for cartesian, "n_r;q1,q2,..." for hyper.
    #[arg(long)]
    state: String,
    /// Cartesian point "x1,x2,...".
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Hyperradius.
    #[arg(long)]
    r: Option<f64>,
    /// Angles "t1,t2,..." in [0, pi/2].
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
}

#[derive(Args, Debug)]
struct CgCmd {
    #[command(flatten)]
    model: ModelArgs,
    /// Evaluate one coefficient from "a,alpha,b,beta,c,gamma" instead of a matrix element.
    #[arg(long, allow_hyphen_values = true)]
    args: Option<String>,
    /// Cartesian state "n1,n2,...".
    #[arg(long)]
    cart: Option<String>,
    /// Hyperspherical state "n_r;q1,q2,...".
    #[arg(long)]
    hyper: Option<String>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_tree(cmd: &TreeCmd) -> Result<()> {
    let cfg = RunConfig { tree: cmd.tree.clone(), ..RunConfig::default() };
    let tree = cfg.load_tree()?;
    let mut out = cmd.out.writer()?;
    match cmd.out.format()? {
        Format::Json => {
            let map = tree.coordinate_map();
            let coords: Vec<String> = (1..=tree.dim()).map(|i| map.product_string(i)).collect();
            let cells: Vec<String> =
                tree.internal_nodes().iter().map(|&id| tree.cell_type(id).map(|c| c.to_string())).collect::<std::result::Result<_, _>>()?;
            let doc = serde_json::json!({
                "dsl": tree.to_string(),
                "tree": tree_to_json(&tree),
                "coordinates": coords,
                "cells": cells,
            });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
        Format::Text | Format::Csv => {
            write!(out, "{}", tree.coordinate_map())?;
            if cmd.cells {
                for (j, &id) in tree.internal_nodes().iter().enumerate() {
                    let leaves: Vec<String> = tree.leaves_under(id).iter().map(|i| format!("x{i}")).collect();
                    writeln!(out, "t{} cell {} over {}", j + 1, tree.cell_type(id)?, leaves.join(" "))?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_matrix(cmd: &MatrixCmd) -> Result<()> {
    let cfg = cmd.model.config()?;
    let (tree, params) = cfg.load()?;
    let method: Method = cmd.method.parse()?;
    let format = cmd.out.format()?;
    let w = assemble(&tree, &params, cfg.n, method, thread_cap()?)?;
    let doc = MatrixDocument::new(&tree, &params, method, &w);
    let mut out = cmd.out.writer()?;
    match format {
        Format::Text | Format::Csv => doc.write_csv(&mut out)?,
        Format::Json => doc.write_json(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn cmd_verify(cmd: &VerifyCmd) -> Result<()> {
    let cfg = RunConfig { tol: cmd.tol, seed: cmd.seed, ..cmd.model.config()? };
    let (tree, params) = cfg.load()?;
    let format = cmd.out.format()?;
    let report = verify(&tree, &params, cfg.n, cfg.tol, cfg.seed, thread_cap()?)?;
    let mut out = cmd.out.writer()?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
        Format::Text | Format::Csv => write!(out, "{report}")?,
    }
    out.flush()?;
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<String> =
            report.failures().iter().map(|c| format!("{} ({:.3e} at {})", c.name, c.max_deviation, c.worst)).collect();
        Err(CliError::Verification(names.join("; ")))
    }
}

fn cmd_eval(cmd: &EvalCmd) -> Result<()> {
    let (tree, params) = cmd.model.config()?.load()?;
    let mut out = io::stdout().lock();
    match cmd.basis {
        Basis::Cartesian => {
            let state = parse_cartesian_state(&cmd.state)?;
            let x = match (&cmd.x, cmd.r, &cmd.theta) {
                (Some(x), _, _) => parse_reals(x, "--x")?,
                (None, Some(r), Some(theta)) => {
                    tree.angles_to_unit_vector(&parse_reals(theta, "--theta")?)?.into_iter().map(|u| r * u).collect()
                }
                _ => return Err(CliError::Input("cartesian evaluation needs --x, or --r with --theta".into())),
            };
            let value = cartesian_wavefunction(&params, &state, &x)?;
            writeln!(out, "value = {}", num(value))?;
        }
        Basis::Hyper => {
            let state = parse_hyperspherical_state(&cmd.state)?;
            if state.q.len() + 1 != tree.dim() {
                return Err(CliError::Input(format!(
                    "hyperspherical state has {} q values, the tree has {} angles",
                    state.q.len(),
                    tree.dim() - 1
                )));
            }
            let (r, theta) = match (cmd.r, &cmd.theta) {
                (Some(r), Some(theta)) => (r, parse_reals(theta, "--theta")?),
                _ => return Err(CliError::Input("hyperspherical evaluation needs --r and --theta".into())),
            };
            let momenta = node_momenta(&tree, &params, &state)?;
            let radial = radial_function(params.omega(), tree.dim(), momenta.root(), state.n_r, r)?;
            let angular = angular_function(&tree, &params, &state, &theta)?;
            writeln!(out, "value = {}", num(radial * angular))?;
            writeln!(out, "radial = {}", num(radial))?;
            writeln!(out, "angular = {}", num(angular))?;
            write_momenta(&mut out, &tree, &params, &state.q, |id| momenta.at(id))?;
        }
    }
    Ok(())
}

fn write_momenta(
    out: &mut impl Write,
    tree: &Tree,
    params: &ModelParams,
    q: &[u32],
    l: impl Fn(polyosc_core::tree::NodeId) -> f64,
) -> Result<()> {
    for (id, node) in tree.nodes() {
        match node.kind {
            NodeKind::Leaf { coord } => {
                writeln!(out, "x{coord}: l = {}  (1/2 {} {})", l(id), params.signs()[coord - 1], params.k()[coord - 1])?
            }
            NodeKind::Internal { angle, .. } => {
                writeln!(out, "t{angle}: l = {}  q = {}  v = {}", l(id), q[angle - 1], node.v)?
            }
        }
    }
    Ok(())
}

fn cmd_cg(cmd: &CgCmd) -> Result<()> {
    let mut out = io::stdout().lock();
    if let Some(args) = &cmd.args {
        let v = parse_reals(args, "--args")?;
        let [a, alpha, b, beta, c, gamma] = v[..] else {
            return Err(CliError::Input(format!("--args needs six numbers, got {}", v.len())));
        };
        let args = CgArgs::new(a, alpha, b, beta, c, gamma);
        let s = args.structure()?;
        writeln!(
            out,
            "a - alpha = {}  b - beta = {}  c - gamma = {}  a + b - c = {}  selection rule {}",
            s.a_minus_alpha,
            s.b_minus_beta,
            s.c_minus_gamma,
            s.a_plus_b_minus_c,
            if args.satisfies_selection_rule() { "holds" } else { "fails" }
        )?;
        writeln!(out, "C = {}", num(cg_continued(&args)?))?;
        return Ok(());
    }
    let (tree, params) = cmd.model.config()?.load()?;
    let (Some(cart), Some(hyper)) = (&cmd.cart, &cmd.hyper) else {
        return Err(CliError::Input("cg needs either --args or both --cart and --hyper".into()));
    };
    let cart = parse_cartesian_state(cart)?;
    let hyper = parse_hyperspherical_state(hyper)?;
    if hyper.q.len() + 1 != tree.dim() {
        return Err(CliError::Input(format!("{hyper} does not have one q per angle of {tree}")));
    }
    let mut product = 1.0;
    for (j, cell) in collect_cell_data(&tree, &params, &cart, &hyper)?.iter().enumerate() {
        let leaves: Vec<String> = tree.leaves_under(cell.node).iter().map(|i| format!("x{i}")).collect();
        writeln!(out, "t{} cell {} over {}", j + 1, cell.kind, leaves.join(" "))?;
        writeln!(
            out,
            "  l_s = {}  v_s = {}  l_r = {}  v_r = {}  N_s = {}  N_r = {}  l = {}  q = {}",
            cell.ls, cell.vs, cell.lr, cell.vr, cell.ns, cell.nr, cell.l, cell.q
        )?;
        if cell.ms < 0 || cell.mr < 0 || cell.excess() < 0 {
            writeln!(out, "  excess (N_s - l_s)/2 = {}, (N_r - l_r)/2 = {}: coefficient 0", cell.ms, cell.mr)?;
            product = 0.0;
            continue;
        }
        let a = cell_cg_args(cell)?;
        writeln!(
            out,
            "  a = {}  alpha = {}  b = {}  beta = {}  c = {}  gamma = {}",
            a.a, a.alpha, a.b, a.beta, a.c, a.gamma
        )?;
        let coefficient = cell_coefficient(cell)?;
        let phase = if (i64::from(cell.q) - cell.mr).rem_euclid(2) == 0 { "+1" } else { "-1" };
        writeln!(out, "  phase = {phase}  C = {}  coefficient = {}", num(cg_continued(&a)?), num(coefficient))?;
        product *= coefficient;
    }
    writeln!(out, "W = {}", num(product))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Tree(c) => cmd_tree(c),
        Command::Matrix(c) => cmd_matrix(c),
        Command::Verify(c) => cmd_verify(c),
        Command::Eval(c) => cmd_eval(c),
        Command::Cg(c) => cmd_cg(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
