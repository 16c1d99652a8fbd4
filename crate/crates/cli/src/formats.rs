//! File formats: state-space JSON, network JSON, gain CSV and gain JSON.

use std::path::Path;

use lossless_core::analysis::{GainMatrix, Metric};
use lossless_core::swing::PowerNetwork;
use lossless_core::synth::{Controller, ControllerKind};
use lossless_core::StateSpace;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `{n, m, p, A, B, C, D}` with row-major nested arrays. Controllers carry
/// an optional `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceFile {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ControllerKind>,
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix(name: &str, rows: &[Vec<f64>], r: usize, c: usize) -> Result<DMatrix<f64>, CliError> {
    // Empty dimensions may be written as [] or as r empty rows.
    if r * c == 0 && rows.iter().all(|row| row.is_empty()) && (rows.is_empty() || rows.len() == r) {
        return Ok(DMatrix::zeros(r, c));
    }
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(CliError::Parse(format!("{name} must be {r}x{c}")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl StateSpaceFile {
    pub fn from_sys(sys: &StateSpace, kind: Option<ControllerKind>) -> Self {
        Self {
            n: sys.n(),
            m: sys.m(),
            p: sys.p(),
            a: rows(sys.a()),
            b: rows(sys.b()),
            c: rows(sys.c()),
            d: rows(sys.d()),
            kind,
        }
    }

    pub fn to_sys(&self) -> Result<StateSpace, CliError> {
        let (n, m, p) = (self.n, self.m, self.p);
        Ok(StateSpace::new(
            matrix("A", &self.a, n, n)?,
            matrix("B", &self.b, n, m)?,
            matrix("C", &self.c, p, n)?,
            matrix("D", &self.d, p, m)?,
        )?)
    }

    pub fn to_controller(&self) -> Result<Controller<f64>, CliError> {
        Ok(Controller::new(self.to_sys()?, self.kind.unwrap_or(ControllerKind::Custom)))
    }
}

/// Either input accepted where a model is expected.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelInput {
    StateSpace(StateSpace),
    Network(PowerNetwork),
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn parse_state_space(text: &str) -> Result<StateSpace, CliError> {
    let file: StateSpaceFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    file.to_sys()
}

pub fn parse_network(text: &str) -> Result<PowerNetwork, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

/// Networks are recognized by their `buses` key.
pub fn parse_model(text: &str) -> Result<ModelInput, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    if value.get("buses").is_some() {
        Ok(ModelInput::Network(serde_json::from_value(value).map_err(|e| CliError::Parse(e.to_string()))?))
    } else {
        let file: StateSpaceFile = serde_json::from_value(value).map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(ModelInput::StateSpace(file.to_sys()?))
    }
}

pub fn to_json_bytes<S: Serialize>(value: &S) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header `bus,<ids...>`, then one row per monitored bus led by its id.
pub fn gains_to_csv(g: &GainMatrix) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["bus".to_string()];
    header.extend(g.bus_ids.iter().map(|id| id.to_string()));
    w.write_record(&header).expect("in-memory write");
    for i in 0..g.n() {
        let mut rec = vec![g.bus_ids[i].to_string()];
        rec.extend((0..g.n()).map(|k| fmt_sig17(g.values[(i, k)])));
        w.write_record(&rec).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Reads a matrix written by [`gains_to_csv`]; metric and boundaries are not
/// part of the CSV and must be supplied.
pub fn gains_from_csv(bytes: &[u8], metric: Metric, cluster_boundaries: Vec<usize>) -> Result<GainMatrix, CliError> {
    let parse_err = |e: &dyn std::fmt::Display| CliError::Parse(format!("gain CSV: {e}"));
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(|e| parse_err(&e))?.clone();
    let bus_ids = header
        .iter()
        .skip(1)
        .map(|s| s.parse::<usize>().map_err(|e| parse_err(&e)))
        .collect::<Result<Vec<_>, _>>()?;
    let n = bus_ids.len();
    let mut values = DMatrix::zeros(n, n);
    let mut count = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(&e))?;
        if i >= n || rec.len() != n + 1 {
            return Err(CliError::Parse("gain CSV is not square".into()));
        }
        for k in 0..n {
            values[(i, k)] = rec[k + 1].parse::<f64>().map_err(|e| parse_err(&e))?;
        }
        count += 1;
    }
    if count != n {
        return Err(CliError::Parse("gain CSV is not square".into()));
    }
    Ok(GainMatrix { values, metric, log_transformed: false, bus_ids, cluster_boundaries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainsFile {
    pub metric: Metric,
    pub bus_ids: Vec<usize>,
    pub cluster_boundaries: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

impl GainsFile {
    pub fn from_gains(g: &GainMatrix) -> Self {
        Self {
            metric: g.metric,
            bus_ids: g.bus_ids.clone(),
            cluster_boundaries: g.cluster_boundaries.clone(),
            values: rows(&g.values),
        }
    }

    pub fn to_gains(&self) -> Result<GainMatrix, CliError> {
        let n = self.bus_ids.len();
        Ok(GainMatrix {
            values: matrix("values", &self.values, n, n)?,
            metric: self.metric,
            log_transformed: false,
            bus_ids: self.bus_ids.clone(),
            cluster_boundaries: self.cluster_boundaries.clone(),
        })
    }
}
