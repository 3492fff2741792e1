//! Declarative run configuration: a JSON document with the sections
//! `model`, `state`, `parameters`, `evolution`, `method` and `output`.
//!
//! Every rejection names the offending `section.key` and, when it can be found
//! in the source text, its line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classical::Scheme;
use crate::correlator::MAX_LNZ_SLICES;
use crate::estimate::Method;
use crate::models::{initial_state, ModelSpec, StateKind};
use crate::semiclassical::{FailurePolicy, MIN_SAMPLES};
use crate::wigner::gaussian_for;

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_LNZ_SLICES: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    /// Dotted `section.key` path.
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in `{}`", self.path)?;
        if let Some(line) = self.line {
            write!(f, " (line {line})")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            line: None,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametersSection {
    /// Label of the estimated parameter; defaults to the model's first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Overrides of the base parameter values, by label.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    /// Estimate the full QFIM instead of one entry.
    #[serde(default)]
    pub qfim: bool,
    /// Values of the target parameter for `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    pub route: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_slices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Repetitions over seeds for `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailurePolicy>,
}

impl MethodSection {
    pub fn route(route: Method) -> Self {
        MethodSection {
            route,
            d_lambda: None,
            quad_order: None,
            n_slices: None,
            n_samples: None,
            dt: None,
            seed: None,
            seeds: None,
            scheme: None,
            failure: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub state: StateKind,
    #[serde(default)]
    pub parameters: ParametersSection,
    pub evolution: EvolutionSection,
    pub method: MethodSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(skip)]
    source: Option<String>,
}

/// Line of the last segment of `path` found in `src`, searching each segment
/// after the previous one.
fn locate(src: &str, path: &str) -> Option<usize> {
    let mut from = 0;
    let mut hit = None;
    for seg in path.split('.') {
        if seg.is_empty() || seg.starts_with('[') || seg.chars().all(|c| c.is_ascii_digit()) {
            continue;
        }
        match src[from..].find(&format!("\"{seg}\"")) {
            Some(i) => {
                from += i;
                hit = Some(from);
            }
            None => break,
        }
    }
    hit.map(|pos| src[..pos].matches('\n').count() + 1)
}

impl RunConfig {
    pub fn new(model: ModelSpec, t: f64, method: MethodSection) -> Self {
        RunConfig {
            model,
            state: StateKind::Ground,
            parameters: ParametersSection::default(),
            evolution: EvolutionSection { t: Some(t), t_grid: None },
            method,
            output: OutputSection::default(),
            source: None,
        }
    }

    /// Parses without semantic validation.
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(src);
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let message = inner.to_string();
            let line = if inner.line() > 0 { Some(inner.line()) } else { None };
            ConfigError {
                path: if path == "." { "<root>".into() } else { path },
                line,
                message,
            }
        })?;
        cfg.source = Some(src.to_string());
        Ok(cfg)
    }

    /// Parses and validates.
    pub fn from_json(src: &str) -> Result<Self, ConfigError> {
        let cfg = Self::parse(src)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let cfg = Self::read_path(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses without validation, so callers can apply overrides first.
    pub fn read_path(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&src)
    }

    fn fail(&self, path: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            path: path.to_string(),
            line: self.source.as_deref().and_then(|s| locate(s, path)),
            message: message.into(),
        }
    }

    /// The model with `parameters.values` applied.
    pub fn spec(&self) -> Result<ModelSpec, ConfigError> {
        let mut spec = self.model.clone();
        for (label, &v) in &self.parameters.values {
            let key = format!("parameters.values.{label}");
            let index = spec
                .parameter_index(label)
                .ok_or_else(|| self.fail(&key, format!("{} has no parameter `{label}`", spec.id())))?;
            spec = spec.with_parameter(index, v).map_err(|e| self.fail(&key, e.to_string()))?;
        }
        Ok(spec)
    }

    pub fn target_index(&self) -> Result<usize, ConfigError> {
        match &self.parameters.target {
            None => Ok(0),
            Some(label) => self.model.parameter_index(label).ok_or_else(|| {
                self.fail(
                    "parameters.target",
                    format!("{} has no parameter `{label}`; known: {:?}", self.model.id(), self.model.parameter_labels()),
                )
            }),
        }
    }

    /// Evolution times: the single `t`, or the grid.
    pub fn times(&self) -> Vec<f64> {
        match (&self.evolution.t, &self.evolution.t_grid) {
            (Some(t), _) => vec![*t],
            (None, Some(grid)) => grid.clone(),
            (None, None) => Vec::new(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        self.method.seed.or_else(|| self.method.seeds.as_ref().and_then(|s| s.first().copied()))
    }

    pub fn n_samples(&self) -> usize {
        self.method.n_samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate().map_err(|e| self.fail("model", e.to_string()))?;
        let spec = self.spec()?;
        spec.validate().map_err(|e| self.fail("parameters.values", e.to_string()))?;
        self.target_index()?;

        match (&self.evolution.t, &self.evolution.t_grid) {
            (Some(_), Some(_)) => return Err(self.fail("evolution", "give either `t` or `t_grid`, not both")),
            (None, None) => return Err(self.fail("evolution", "missing `t` or `t_grid`")),
            (Some(t), None) if !(t.is_finite() && *t >= 0.0) => {
                return Err(self.fail("evolution.t", format!("t must be finite and >= 0, got {t}")))
            }
            (None, Some(grid)) if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) => {
                return Err(self.fail("evolution.t_grid", "every t must be finite and >= 0"))
            }
            _ => {}
        }
        if let Some(grid) = &self.parameters.lambda_grid {
            if grid.iter().any(|v| !v.is_finite()) {
                return Err(self.fail("parameters.lambda_grid", "values must be finite"));
            }
        }

        let m = &self.method;
        if let Some(d) = m.d_lambda {
            if !(d > 0.0 && d.is_finite()) {
                return Err(self.fail("method.d_lambda", "d_lambda must be positive"));
            }
        }
        if m.quad_order == Some(0) {
            return Err(self.fail("method.quad_order", "quad_order must be at least 1"));
        }
        if let Some(dt) = m.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(self.fail("method.dt", "dt must be positive"));
            }
        }
        if self.parameters.qfim && !matches!(m.route, Method::GeneratorVariance | Method::SemiclassicalMc) {
            return Err(self.fail(
                "parameters.qfim",
                format!("the QFIM is available for generator_variance and semiclassical_mc, not {}", m.route),
            ));
        }
        match m.route {
            Method::SemiclassicalMc => {
                if !spec.has_classical() {
                    return Err(self.fail("method.route", "model has no classical counterpart"));
                }
                if m.seed.is_none() && m.seeds.as_ref().is_none_or(|s| s.is_empty()) {
                    return Err(self.fail("method.seed", "a seed is required for the semiclassical_mc route"));
                }
                if self.n_samples() < MIN_SAMPLES {
                    return Err(self.fail("method.n_samples", format!("need at least {MIN_SAMPLES} samples")));
                }
                gaussian_for(&spec, &self.state).map_err(|e| self.fail("state", e.to_string()))?;
            }
            Method::CtpLnz => {
                let n = m.n_slices.unwrap_or(DEFAULT_LNZ_SLICES);
                if !(2..=MAX_LNZ_SLICES).contains(&n) {
                    return Err(self.fail("method.n_slices", format!("n_slices must lie in 2..={MAX_LNZ_SLICES}")));
                }
                if spec.is_time_dependent() {
                    return Err(self.fail("method.route", "ctp_lnz needs a time-independent model"));
                }
                initial_state(&spec, &self.state).map_err(|e| self.fail("state", e.to_string()))?;
            }
            _ => {
                initial_state(&spec, &self.state).map_err(|e| self.fail("state", e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_walks_nested_keys() {
        let src = "{\n  \"model\": {\"id\": \"x\"},\n  \"method\": {\n    \"route\": \"a\",\n    \"seed\": 3\n  }\n}";
        assert_eq!(locate(src, "method.seed"), Some(5));
        assert_eq!(locate(src, "method"), Some(3));
        assert_eq!(locate(src, "output.path"), None);
    }
}
