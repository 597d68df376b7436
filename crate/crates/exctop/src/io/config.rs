//! Experiment configuration files.
//!
//! Flat TOML key/value pairs:
//!
//! ```toml
//! model = "squared-exponential"   # or "matern-5/2", "matern-3/2"
//! ell = 0.1
//! lambdas = [-1.0, 0.0, 1.0]
//! dims = [512, 512]               # rows, cols (a single integer means square)
//! eps = 0.001953125
//! replicates = 200
//! seed = 1
//! mode = "torus"                  # or "bounded"
//! origin = [0.0, 0.0]             # lower-left corner of the field extent
//! windows = [[0.0, 0.5, 0.0, 0.5], [[0.0, 1.0, 0.0, 0.25]]]
//! sweep_eps = [0.015625, 0.0078125]
//! threads = 8
//! source = "gaussian"             # or "sine-product"
//! allow_irregular = false
//! ```
//!
//! A window is either one `[x0, x1, y0, y1]` rectangle or a list of them.

use crate::experiment::{ExperimentConfig, FieldSource};
use exctop_core::{BoundaryMode, CovarianceKind, CovarianceModel, Rect, Window};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid config:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dims {
    Square(usize),
    RowsCols([usize; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    Rect([f64; 4]),
    Rects(Vec<[f64; 4]>),
}

impl WindowSpec {
    fn rects(&self) -> Vec<[f64; 4]> {
        match self {
            Self::Rect(r) => vec![*r],
            Self::Rects(rs) => rs.clone(),
        }
    }
}

/// The file as written, echoed into run manifests.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allow_irregular: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<Dims>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windows: Option<Vec<WindowSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Converts to an [`ExperimentConfig`], reporting every missing or
    /// invalid key, then every semantic violation.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut errs = Vec::new();
        let source = match self.source.as_deref() {
            None | Some("gaussian") => FieldSource::Gaussian,
            Some("sine-product") => FieldSource::SineProduct,
            Some(s) => {
                errs.push(format!("source: unknown field source `{s}`"));
                FieldSource::Gaussian
            }
        };
        let model = match (&self.model, self.ell) {
            (Some(m), Some(ell)) => match m.parse::<CovarianceKind>() {
                Ok(_) if !(ell.is_finite() && ell > 0.0) => {
                    errs.push(format!("ell: must be positive, got {ell}"));
                    None
                }
                Ok(kind) => Some(CovarianceModel::new(kind, ell)),
                Err(e) => {
                    errs.push(format!("model: {e}"));
                    None
                }
            },
            (Some(_), None) => {
                errs.push("ell: missing".into());
                None
            }
            (None, Some(_)) => {
                errs.push("model: missing (ell given)".into());
                None
            }
            (None, None) => {
                if source == FieldSource::Gaussian {
                    errs.push("model: missing".into());
                    errs.push("ell: missing".into());
                }
                None
            }
        };
        let mode = match self.mode.as_deref() {
            None => {
                errs.push("mode: missing".into());
                BoundaryMode::Torus
            }
            Some(m) => m.parse().unwrap_or_else(|_| {
                errs.push(format!("mode: expected `torus` or `bounded`, got `{m}`"));
                BoundaryMode::Torus
            }),
        };
        let dims = match &self.dims {
            None => {
                errs.push("dims: missing".into());
                (0, 0)
            }
            Some(Dims::Square(n)) => (*n, *n),
            Some(Dims::RowsCols([r, c])) => (*r, *c),
        };
        let mut required = |name: &str, present: bool| {
            if !present {
                errs.push(format!("{name}: missing"));
            }
        };
        required("lambdas", self.lambdas.is_some());
        required("eps", self.eps.is_some());
        required("replicates", self.replicates.is_some());
        required("seed", self.seed.is_some());
        let mut windows = Vec::new();
        for (i, spec) in self.windows.iter().flatten().enumerate() {
            let rects = spec
                .rects()
                .into_iter()
                .map(|[x0, x1, y0, y1]| Rect::new(x0, x1, y0, y1))
                .collect();
            match Window::new(rects) {
                Ok(w) => windows.push(w),
                Err(e) => errs.push(format!("windows[{i}]: {e}")),
            }
        }
        if !errs.is_empty() {
            return Err(ConfigError::Invalid(errs));
        }
        let config = ExperimentConfig {
            source,
            model,
            allow_irregular: self.allow_irregular.unwrap_or(false),
            lambdas: self.lambdas.clone().unwrap_or_default(),
            dims,
            eps: self.eps.unwrap_or_default(),
            replicates: self.replicates.unwrap_or_default(),
            seed: self.seed.unwrap_or_default(),
            mode,
            origin: self.origin.map_or((0.0, 0.0), |[x, y]| (x, y)),
            windows,
            sweep_eps: self.sweep_eps.clone().unwrap_or_default(),
            threads: self.threads,
        };
        match config.validate() {
            Ok(()) => Ok(config),
            Err(crate::experiment::ExperimentError::Config(errs)) => {
                Err(ConfigError::Invalid(errs))
            }
            Err(e) => Err(ConfigError::Invalid(vec![e.to_string()])),
        }
    }
}
