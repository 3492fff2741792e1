//! One-JSON-object-per-line result records.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::estimate::{Method, QfiEstimate};
use crate::exact::Qfim;
use crate::models::Discretization;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Stderr {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub method: Method,
    pub model: String,
    pub lambda: Vec<f64>,
    pub t: f64,
    pub qfi: Option<f64>,
    pub qfim: Option<Vec<Vec<f64>>>,
    pub stderr: Option<Stderr>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub discretization: Option<Discretization>,
    pub runtime_ms: f64,
    pub warnings: Vec<String>,
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl ResultRecord {
    pub fn from_estimate(est: &QfiEstimate, discretization: Option<Discretization>) -> Self {
        let meta = &est.metadata;
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            method: est.method,
            model: meta.model.clone(),
            lambda: meta.lambda.clone(),
            t: meta.t,
            qfi: Some(est.value),
            qfim: None,
            stderr: est.stderr.map(Stderr::Scalar),
            n_samples: meta.n_samples,
            seed: meta.seed,
            dt: meta.dt,
            discretization,
            runtime_ms: meta.runtime_ms,
            warnings: meta.warnings.clone(),
        }
    }

    pub fn from_qfim(q: &Qfim, discretization: Option<Discretization>) -> Self {
        let meta = &q.metadata;
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            method: q.method,
            model: meta.model.clone(),
            lambda: meta.lambda.clone(),
            t: meta.t,
            qfi: None,
            qfim: Some(rows(&q.values)),
            stderr: q.stderr.as_ref().map(|s| Stderr::Matrix(rows(s))),
            n_samples: meta.n_samples,
            seed: meta.seed,
            dt: meta.dt,
            discretization,
            runtime_ms: meta.runtime_ms,
            warnings: meta.warnings.clone(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn from_line(line: &str) -> serde_json::Result<Self> {
        serde_json::from_str(line)
    }

    /// Everything except the wall-clock runtime, for reproducibility checks.
    pub fn same_values(&self, other: &Self) -> bool {
        ResultRecord {
            runtime_ms: 0.0,
            ..self.clone()
        } == ResultRecord {
            runtime_ms: 0.0,
            ..other.clone()
        }
    }

    pub fn append_to(&self, path: &Path) -> std::io::Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        writeln!(f, "{}", self.to_line())
    }
}

pub fn read_records(path: &Path) -> std::io::Result<Vec<ResultRecord>> {
    let f = std::fs::File::open(path)?;
    BufReader::new(f)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| ResultRecord::from_line(&l?).map_err(std::io::Error::other))
        .collect()
}
