//! Parallel matrix assembly. Every entry is a pure function of its state pair,
//! so the result does not depend on the number of threads.

use polyosc_core::bases::{enumerate_cartesian, enumerate_hyperspherical, ModelParams};
use polyosc_core::quad::TanhSinh;
use polyosc_core::transition::{oracle_transition, transition_coefficient, TransitionMatrix};
use polyosc_core::tree::Tree;
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::matrix_io::Method;

pub const THREADS_ENV: &str = "POLYOSC_THREADS";

/// Thread cap from `POLYOSC_THREADS`; unset, empty or zero means rayon's default.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Input(format!("{THREADS_ENV}='{v}' is not a thread count"))),
        },
    }
}

pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Numerical(format!("thread pool: {e}")))
}

/// Shell-`n` matrix by the chosen method, entries computed in parallel.
pub fn assemble(
    tree: &Tree,
    params: &ModelParams,
    n: u32,
    method: Method,
    threads: Option<usize>,
) -> Result<TransitionMatrix> {
    params.check_tree(tree)?;
    let rows = enumerate_cartesian(tree.dim(), n);
    let cols = enumerate_hyperspherical(tree, n);
    let quad = TanhSinh::relative(polyosc_core::quad::DEFAULT_TOL);
    let pairs: Vec<(usize, usize)> = (0..rows.len()).flat_map(|i| (0..cols.len()).map(move |j| (i, j))).collect();
    let values = pool(threads)?.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| match method {
                Method::Product => transition_coefficient(tree, params, &rows[i], &cols[j]),
                Method::Oracle => oracle_transition(tree, params, &rows[i], &cols[j], &quad),
            })
            .collect::<std::result::Result<Vec<f64>, _>>()
    })?;
    Ok(TransitionMatrix { n, rows, cols, values })
}
