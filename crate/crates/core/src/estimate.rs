use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QfiError, Result};

/// Which route produced an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    OverlapFd,
    GeneratorVariance,
    CorrelatorIntegral,
    CtpLnz,
    #[serde(alias = "semiclassical")]
    SemiclassicalMc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::OverlapFd => "overlap_fd",
            Method::GeneratorVariance => "generator_variance",
            Method::CorrelatorIntegral => "correlator_integral",
            Method::CtpLnz => "ctp_lnz",
            Method::SemiclassicalMc => "semiclassical_mc",
        }
    }

    pub const ALL: [Method; 5] = [
        Method::OverlapFd,
        Method::GeneratorVariance,
        Method::CorrelatorIntegral,
        Method::CtpLnz,
        Method::SemiclassicalMc,
    ];

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Method::SemiclassicalMc)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Provenance attached to every estimate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub model: String,
    pub lambda: Vec<f64>,
    pub param: Option<usize>,
    pub t: f64,
    pub seed: Option<u64>,
    pub n_samples: Option<usize>,
    pub dt: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub runtime_ms: f64,
    pub warnings: Vec<String>,
    /// Route-specific numbers (quadrature nodes, dropped fraction, discretization error, ...).
    pub diagnostics: BTreeMap<String, f64>,
}

impl Metadata {
    pub fn new(model: &str, lambda: &[f64], param: Option<usize>, t: f64) -> Self {
        Metadata {
            model: model.to_string(),
            lambda: lambda.to_vec(),
            param,
            t,
            ..Default::default()
        }
    }

    pub fn tolerance(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }
}

/// A QFI value with its method, optional statistical error and provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QfiEstimate {
    pub value: f64,
    pub stderr: Option<f64>,
    pub method: Method,
    pub metadata: Metadata,
}

/// Round-off band below zero that is clamped instead of rejected.
pub const NEGATIVE_CLAMP: f64 = 1e-8;

pub const CLAMP_WARNING: &str = "negative round-off value clamped to zero";

impl QfiEstimate {
    /// Applies the clamping policy to a raw QFI value.
    pub fn new(raw: f64, method: Method, mut metadata: Metadata) -> Result<Self> {
        let value = clamp_qfi(raw, &mut metadata.warnings)?;
        Ok(QfiEstimate {
            value,
            stderr: None,
            method,
            metadata,
        })
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }

    pub fn was_clamped(&self) -> bool {
        self.metadata.warnings.iter().any(|w| w == CLAMP_WARNING)
    }
}

pub(crate) fn clamp_qfi(raw: f64, warnings: &mut Vec<String>) -> Result<f64> {
    if !raw.is_finite() {
        return Err(QfiError::NegativeQfi { value: raw });
    }
    if raw >= 0.0 {
        Ok(raw)
    } else if raw >= -NEGATIVE_CLAMP {
        warnings.push(CLAMP_WARNING.to_string());
        Ok(0.0)
    } else {
        Err(QfiError::NegativeQfi { value: raw })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_negative_values_are_clamped_and_flagged() {
        let est = QfiEstimate::new(-3e-9, Method::GeneratorVariance, Metadata::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.was_clamped());
    }

    #[test]
    fn large_negative_values_are_rejected() {
        let err = QfiEstimate::new(-1e-6, Method::OverlapFd, Metadata::default()).unwrap_err();
        assert!(matches!(err, QfiError::NegativeQfi { .. }));
    }
}
