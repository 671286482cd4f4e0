//! Transition matrices on disk: CSV with `#` metadata lines, and JSON.
//!
//! CSV numbers are written with 17 significant digits; JSON uses the shortest
//! representation that round-trips, so both parse back to identical bits.

use std::io::{BufRead, Write};

use polyosc_core::bases::{CartesianState, HypersphericalState, ModelParams};
use polyosc_core::transition::TransitionMatrix;
use polyosc_core::tree::Tree;
use serde::{Deserialize, Serialize};

use crate::config::{parse_cartesian_state, parse_hyperspherical_state, parse_signs};
use crate::error::{CliError, Result};

/// How the entries were computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Product,
    Oracle,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Product => "product",
            Method::Oracle => "oracle",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(Method::Product),
            "oracle" => Ok(Method::Oracle),
            other => Err(CliError::Input(format!("unknown method '{other}', expected product or oracle"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperJson {
    pub n_r: u32,
    pub q: Vec<u32>,
}

/// Matrix plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    /// DSL rendering of the tree.
    pub tree: String,
    pub omega: f64,
    pub k: Vec<f64>,
    pub signs: Vec<String>,
    #[serde(rename = "N")]
    pub n: u32,
    pub method: Method,
    /// Cartesian quantum numbers, one tuple per row.
    pub rows: Vec<Vec<u32>>,
    pub cols: Vec<HyperJson>,
    pub values: Vec<Vec<f64>>,
}

impl MatrixDocument {
    pub fn new(tree: &Tree, params: &ModelParams, method: Method, w: &TransitionMatrix) -> Self {
        Self {
            tree: tree.to_string(),
            omega: params.omega(),
            k: params.k().to_vec(),
            signs: params.signs().iter().map(ToString::to_string).collect(),
            n: w.n,
            method,
            rows: w.rows.iter().map(|r| r.n.clone()).collect(),
            cols: w.cols.iter().map(|c| HyperJson { n_r: c.n_r, q: c.q.clone() }).collect(),
            values: (0..w.rows.len()).map(|i| w.row(i).to_vec()).collect(),
        }
    }

    pub fn to_matrix(&self) -> TransitionMatrix {
        TransitionMatrix {
            n: self.n,
            rows: self.rows.iter().map(|r| CartesianState::new(r.clone())).collect(),
            cols: self.cols.iter().map(|c| HypersphericalState::new(c.n_r, c.q.clone())).collect(),
            values: self.values.iter().flatten().copied().collect(),
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        let signs = parse_signs(&self.signs.join(","))?;
        Ok(ModelParams::new(self.omega, self.k.clone(), signs)?)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn read_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        doc.check_shape()?;
        Ok(doc)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        writeln!(out, "# tree = {}", self.tree)?;
        writeln!(out, "# omega = {}", self.omega)?;
        writeln!(out, "# k = {}", list(&self.k))?;
        writeln!(out, "# signs = {}", self.signs.join(","))?;
        writeln!(out, "# N = {}", self.n)?;
        writeln!(out, "# method = {}", self.method)?;
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["cartesian\\hyperspherical".to_string()];
        header.extend(self.cols.iter().map(|c| HypersphericalState::new(c.n_r, c.q.clone()).to_string()));
        writer.write_record(&header)?;
        for (row, values) in self.rows.iter().zip(&self.values) {
            let mut record = vec![CartesianState::new(row.clone()).to_string()];
            record.extend(values.iter().map(|v| format!("{v:.16e}")));
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut meta = std::collections::BTreeMap::new();
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((key, value)) = rest.split_once('=') {
                    meta.insert(key.trim().to_string(), value.trim().to_string());
                }
            } else {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let get = |key: &str| meta.get(key).ok_or_else(|| CliError::Format(format!("csv metadata lacks '{key}'")));
        let number = |key: &str| -> Result<f64> {
            get(key)?.parse::<f64>().map_err(|_| CliError::Format(format!("csv metadata '{key}' is not a number")))
        };
        let k = get("k")?
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Format(format!("bad k entry '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        let n = get("N")?.parse::<u32>().map_err(|_| CliError::Format("csv metadata 'N' is not an integer".into()))?;
        let method = get("method")?.parse::<Method>().map_err(|e| CliError::Format(e.to_string()))?;

        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let header = reader.headers()?.clone();
        let cols = header
            .iter()
            .skip(1)
            .map(|h| parse_hyperspherical_state(h).map(|s| HyperJson { n_r: s.n_r, q: s.q }))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| CliError::Format(e.to_string()))?;
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for record in reader.records() {
            let record = record?;
            let mut fields = record.iter();
            let label = fields.next().ok_or_else(|| CliError::Format("empty csv row".into()))?;
            rows.push(parse_cartesian_state(label).map_err(|e| CliError::Format(e.to_string()))?.n);
            values.push(
                fields
                    .map(|f| f.parse::<f64>().map_err(|_| CliError::Format(format!("bad matrix entry '{f}'"))))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let doc = Self {
            tree: get("tree")?.clone(),
            omega: number("omega")?,
            k,
            signs: get("signs")?.split(',').map(|s| s.trim().to_string()).collect(),
            n,
            method,
            rows,
            cols,
            values,
        };
        doc.check_shape()?;
        Ok(doc)
    }

    fn check_shape(&self) -> Result<()> {
        let m = self.rows.len();
        if self.cols.len() != m || self.values.len() != m || self.values.iter().any(|r| r.len() != m) {
            return Err(CliError::Format(format!(
                "matrix is not square: {} rows, {} columns",
                self.rows.len(),
                self.cols.len()
            )));
        }
        Ok(())
    }
}
