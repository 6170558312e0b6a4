//! TOML description of a problem: model parameters, the potential and
//! optional solver defaults.
//!
//! ```toml
//! [params]
//! hbar = 1.0
//! mass = 1.0
//!
//! [potential]
//! kind = "piecewise"
//! left_level = 0.0
//! right_level = 0.0
//! segments = [{ x_start = 0.0, x_end = 2.0, u = 1.0 }]
//!
//! [defaults]
//! rel_tol = 1e-10
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, PotentialError};
use crate::model::{ModelParams, Potential};
use crate::riccati::IntegrationConfig;
use crate::spectral::SearchOptions;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDefaults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pole_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_x: Option<f64>,
}

impl SpecDefaults {
    /// Library defaults overridden by the values present here.
    pub fn integration_config(&self) -> IntegrationConfig {
        let d = IntegrationConfig::default();
        IntegrationConfig {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            max_step: self.max_step.or(d.max_step),
            pole_threshold: self.pole_threshold.unwrap_or(d.pole_threshold),
            output_spacing: self.output_spacing.or(d.output_spacing),
            force_numeric: d.force_numeric,
        }
    }

    pub fn search_options(&self) -> SearchOptions {
        let d = SearchOptions::default();
        SearchOptions {
            scan_points: self.scan_points.unwrap_or(d.scan_points),
            probe_x: self.probe_x.or(d.probe_x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpecFile {
    #[serde(default)]
    pub params: ModelParams,
    pub potential: Potential,
    #[serde(default)]
    pub defaults: SpecDefaults,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {source}")]
    Invalid {
        field: String,
        #[source]
        source: Error,
    },
}

impl SpecError {
    pub fn kind(&self) -> &'static str {
        match self {
            SpecError::Io { .. } => "Io",
            SpecError::Syntax { .. } => "Syntax",
            SpecError::Invalid { source, .. } => source.kind(),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn potential_field(e: &PotentialError) -> String {
    match e {
        PotentialError::EmptySegment { index, .. }
        | PotentialError::GapBetweenSegments { index, .. }
        | PotentialError::OverlappingSegments { index, .. } => format!("potential.segments[{index}]"),
        PotentialError::NonIncreasingSamples { index, .. } => format!("potential.samples[{index}]"),
        PotentialError::TooFewSamples { .. } => "potential.samples".into(),
        PotentialError::EmptyDomainWithNoStepPoint | PotentialError::StepPointWithSegments { .. } => {
            "potential.step_at".into()
        }
        PotentialError::NonFinite { field } => format!("potential.{field}"),
    }
}

impl PotentialSpecFile {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let spec: PotentialSpecFile = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            SpecError::Syntax {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, SpecError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        self.params.validate().map_err(|source| SpecError::Invalid {
            field: "params".into(),
            source,
        })?;
        self.potential.validate().map_err(|e| SpecError::Invalid {
            field: potential_field(&e),
            source: e.into(),
        })?;
        self.defaults
            .integration_config()
            .validate()
            .map_err(|source| SpecError::Invalid {
                field: "defaults".into(),
                source,
            })?;
        if self.defaults.scan_points == Some(0) {
            return Err(SpecError::Invalid {
                field: "defaults.scan_points".into(),
                source: Error::InvalidConfig("scan_points must be positive".into()),
            });
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec files always serialize")
    }
}
