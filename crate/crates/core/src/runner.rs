//! Config-driven execution: single runs, sweeps and route comparisons.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classical::StepperConfig;
use crate::config::{ConfigError, RunConfig, DEFAULT_LNZ_SLICES};
use crate::correlator::{qfi_correlator_integral, qfi_from_lnz, TimeGrid};
use crate::error::QfiError;
use crate::estimate::Method;
use crate::exact::{duhamel_generator, qfi_generator_variance, qfi_overlap_fd, qfim, QuadratureConfig};
use crate::models::{build_classical, build_quantum, initial_state, ModelSpec};
use crate::record::{ResultRecord, Stderr};
use crate::semiclassical::{compare_routes, estimate_qfi_sc, estimate_qfim_sc, CompareReport, ScOptions};
use crate::wigner::gaussian_for;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Qfi(#[from] QfiError),
    #[error("cannot write output: {0}")]
    Io(String),
    #[error("all {0} sweep points failed")]
    AllFailed(usize),
}

impl RunError {
    /// 2 for anything the caller can fix in the input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::Qfi(e) => match e {
                QfiError::InvalidInput(_)
                | QfiError::DimensionMismatch { .. }
                | QfiError::Resource { .. }
                | QfiError::NotNormalized(_)
                | QfiError::UnsupportedModel(_)
                | QfiError::UnsupportedState(_)
                | QfiError::InvalidCovariance(_) => 2,
                _ => 3,
            },
            RunError::AllFailed(_) => 3,
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

fn sc_options(cfg: &RunConfig, model: &dyn crate::models::ClassicalModel, seed: u64) -> ScOptions {
    let mut stepper = StepperConfig::for_model(model);
    if let Some(dt) = cfg.method.dt {
        stepper.dt = dt;
    }
    if let Some(scheme) = cfg.method.scheme {
        stepper.scheme = scheme;
    }
    let mut opts = ScOptions::new(cfg.n_samples(), seed).with_stepper(stepper);
    if let Some(policy) = cfg.method.failure {
        opts = opts.with_failure(policy);
    }
    opts
}

/// Evaluates the configured route for `spec` at time `t`.
pub fn evaluate(cfg: &RunConfig, spec: &ModelSpec, t: f64, seed: Option<u64>) -> Result<ResultRecord, QfiError> {
    let param = cfg.target_index().map_err(|e| QfiError::InvalidInput(e.to_string()))?;
    let lambda = spec.parameters();
    let disc = spec.discretization();
    let m = &cfg.method;
    if m.route == Method::SemiclassicalMc {
        let model = build_classical(spec)?;
        let g = gaussian_for(spec, &cfg.state)?;
        let seed = seed.ok_or_else(|| QfiError::InvalidInput("the semiclassical route needs a seed".into()))?;
        let opts = sc_options(cfg, &model, seed);
        return Ok(if cfg.parameters.qfim {
            ResultRecord::from_qfim(&estimate_qfim_sc(&model, &g, &lambda, t, &opts)?, disc)
        } else {
            ResultRecord::from_estimate(&estimate_qfi_sc(&model, &g, &lambda, t, param, &opts)?, disc)
        });
    }
    let family = build_quantum(spec)?;
    let prepared = initial_state(spec, &cfg.state)?;
    let psi = &prepared.state;
    let mut quad = QuadratureConfig::default();
    if let Some(order) = m.quad_order {
        quad.quad_order = order;
    }
    let mut record = match m.route {
        Method::GeneratorVariance if cfg.parameters.qfim => ResultRecord::from_qfim(&qfim(&family, psi, &lambda, t, &quad)?, disc),
        Method::GeneratorVariance => {
            let g = duhamel_generator(&family, &lambda, t, param, &quad)?;
            ResultRecord::from_estimate(&qfi_generator_variance(psi, &g)?, disc)
        }
        Method::OverlapFd => ResultRecord::from_estimate(&qfi_overlap_fd(&family, psi, &lambda, t, param, m.d_lambda)?, disc),
        Method::CorrelatorIntegral => {
            ResultRecord::from_estimate(&qfi_correlator_integral(&family, psi, &lambda, t, param)?, disc)
        }
        Method::CtpLnz => {
            let grid = TimeGrid::new(t, m.n_slices.unwrap_or(DEFAULT_LNZ_SLICES))?;
            let o = family.deformation(&lambda, 0.0, param)?;
            ResultRecord::from_estimate(&qfi_from_lnz(&family, psi, &lambda, grid, &o)?, disc)
        }
        Method::SemiclassicalMc => unreachable!("handled above"),
    };
    record.warnings.extend(prepared.warnings);
    Ok(record)
}

/// Validates and evaluates a single-time configuration.
pub fn run(cfg: &RunConfig) -> Result<ResultRecord, RunError> {
    cfg.validate()?;
    let Some(t) = cfg.evolution.t else {
        return Err(ConfigError {
            path: "evolution.t_grid".into(),
            line: None,
            message: "run takes a single `t`; use sweep for grids".into(),
        }
        .into());
    };
    Ok(evaluate(cfg, &cfg.spec()?, t, cfg.seed())?)
}

/// Appends `record` to `path`, or prints it when no path is given.
pub fn persist(record: &ResultRecord, path: Option<&Path>) -> Result<(), RunError> {
    match path {
        Some(p) => record.append_to(p)?,
        None => println!("{}", record.to_line()),
    }
    Ok(())
}

/// One sweep point. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub lambda: f64,
    pub method: Method,
    pub qfi: Option<f64>,
    pub stderr: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.error.is_some())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), RunError> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(["t", "lambda", "method", "qfi", "stderr", "error"]).map_err(|e| RunError::Io(e.to_string()))?;
        }
        for row in &self.rows {
            w.serialize(row).map_err(|e| RunError::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, RunError> {
        let mut r = csv::Reader::from_path(path).map_err(|e| RunError::Io(e.to_string()))?;
        let rows = r.deserialize().collect::<Result<_, _>>().map_err(|e| RunError::Io(e.to_string()))?;
        Ok(SweepTable { rows })
    }
}

/// Evaluates every point of the `λ × t × seed` grid; per-point failures land in
/// the `error` column.
pub fn sweep(cfg: &RunConfig) -> Result<SweepTable, RunError> {
    cfg.validate()?;
    let cfg_err = |path: &str, message: &str| -> RunError {
        ConfigError {
            path: path.into(),
            line: None,
            message: message.into(),
        }
        .into()
    };
    if cfg.parameters.qfim {
        return Err(cfg_err("parameters.qfim", "sweeps record scalar QFI values"));
    }
    let times = cfg.times();
    if times.is_empty() {
        return Err(cfg_err("evolution.t_grid", "the sweep grid is empty"));
    }
    let spec = cfg.spec()?;
    let param = cfg.target_index()?;
    let lambdas = cfg.parameters.lambda_grid.clone().unwrap_or_else(|| vec![spec.parameters()[param]]);
    if lambdas.is_empty() {
        return Err(cfg_err("parameters.lambda_grid", "the sweep grid is empty"));
    }
    let seeds: Vec<Option<u64>> = match &cfg.method.seeds {
        Some(s) if s.is_empty() => return Err(cfg_err("method.seeds", "the seed list is empty")),
        Some(s) => s.iter().map(|&x| Some(x)).collect(),
        None => vec![cfg.method.seed],
    };
    let mut rows = Vec::new();
    for &lambda in &lambdas {
        let point_spec = spec.clone().with_parameter(param, lambda);
        for &t in &times {
            for &seed in &seeds {
                let outcome = point_spec.clone().and_then(|s| evaluate(cfg, &s, t, seed));
                rows.push(match outcome {
                    Ok(rec) => SweepRow {
                        t,
                        lambda,
                        method: rec.method,
                        qfi: rec.qfi,
                        stderr: match rec.stderr {
                            Some(Stderr::Scalar(s)) => Some(s),
                            _ => None,
                        },
                        error: None,
                    },
                    Err(e) => SweepRow {
                        t,
                        lambda,
                        method: cfg.method.route,
                        qfi: None,
                        stderr: None,
                        error: Some(e.to_string()),
                    },
                });
            }
        }
    }
    Ok(SweepTable { rows })
}

/// Cross-route comparison at the configured point. Seed defaults to 0.
pub fn compare(cfg: &RunConfig) -> Result<CompareReport, RunError> {
    cfg.model.validate().map_err(|e| ConfigError {
        path: "model".into(),
        line: None,
        message: e.to_string(),
    })?;
    let spec = cfg.spec()?;
    let param = cfg.target_index()?;
    let t = cfg.times().first().copied().ok_or_else(|| ConfigError {
        path: "evolution".into(),
        line: None,
        message: "missing `t`".into(),
    })?;
    let mut opts = ScOptions::new(cfg.n_samples(), cfg.seed().unwrap_or(0));
    if spec.has_classical() {
        opts = sc_options(cfg, &build_classical(&spec)?, opts.seed);
    }
    Ok(compare_routes(&spec, &cfg.state, t, param, &opts)?)
}
