//! Run configuration: the JSON document passed with `--config`.

use std::path::PathBuf;

use pwaffine::analysis::BV_BOUND_CONSTANT;
use pwaffine::fields::{field_by_name, FieldClass, FIELD_NAMES};
use pwaffine::AxisBox;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Lemma1,
    Lemma2,
    Converge,
    Bv,
    LocateDemo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Lemma1 => "lemma1",
            Command::Lemma2 => "lemma2",
            Command::Converge => "converge",
            Command::Bv => "bv",
            Command::LocateDemo => "locate-demo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    /// Root directory; `--out` overrides it.
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    /// Report file name under `dir`.
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default = "default_tables")]
    pub tables: String,
    #[serde(default = "default_plots")]
    pub plots: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            report: default_report(),
            tables: default_tables(),
            plots: default_plots(),
        }
    }
}

/// Pass/fail thresholds. Checks whose threshold is absent are skipped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest admissible lemma residual.
    #[serde(default = "default_lemma_residual")]
    pub lemma_residual: f64,
    /// Require the mean averaged error to fall strictly at every level.
    #[serde(default = "default_true")]
    pub strictly_decreasing: bool,
    /// Admissible `[low, high]` for the gradient-norm ratio per halving.
    #[serde(default)]
    pub grad_ratio: Option<[f64; 2]>,
    /// Number of finest levels the ratio check applies to.
    #[serde(default = "default_ratio_levels")]
    pub ratio_levels: usize,
    #[serde(default)]
    pub min_tv: Option<f64>,
    #[serde(default)]
    pub mean_tv: Option<f64>,
    /// `C` in `TV(Pi u) <= C (2 + sqrt 2)`, applied to every sample.
    #[serde(default = "default_bound_constant")]
    pub bound_constant: f64,
    /// Slack on the barycentric test in `locate-demo`.
    #[serde(default = "default_locate")]
    pub locate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lemma_residual: default_lemma_residual(),
            strictly_decreasing: true,
            grad_ratio: None,
            ratio_levels: default_ratio_levels(),
            min_tv: None,
            mean_tv: None,
            bound_constant: default_bound_constant(),
            locate: default_locate(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub dimension: usize,
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(default = "default_exponent")]
    pub p: f64,
    #[serde(default = "default_exponent")]
    pub q: f64,
    #[serde(default)]
    pub r_schedule: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Sampling box for random simplices, balls and demo points; `[-1, 1]^n` if absent.
    #[serde(default)]
    pub domain: Option<AxisBox>,
    /// Random simplices for the lemma checks.
    #[serde(default = "default_simplices")]
    pub simplices: usize,
    /// Random balls for `lemma1`.
    #[serde(default = "default_balls")]
    pub balls: usize,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_report() -> String {
    "report.json".into()
}
fn default_tables() -> String {
    "tables".into()
}
fn default_plots() -> String {
    "plots".into()
}
fn default_lemma_residual() -> f64 {
    1e-8
}
fn default_true() -> bool {
    true
}
fn default_ratio_levels() -> usize {
    2
}
fn default_bound_constant() -> f64 {
    BV_BOUND_CONSTANT
}
fn default_locate() -> f64 {
    1e-10
}
fn default_field() -> String {
    "gaussian".into()
}
fn default_exponent() -> f64 {
    2.0
}
fn default_samples() -> usize {
    32
}
fn default_simplices() -> usize {
    50
}
fn default_balls() -> usize {
    20
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// `[-1, 1]^n` unless a domain is configured.
    pub fn sampling_box(&self) -> AxisBox {
        self.domain
            .clone()
            .unwrap_or_else(|| AxisBox::cube(self.dimension, -1.0, 1.0))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        let n = self.dimension;
        if !(1..=3).contains(&n) {
            return bad(format!("dimension must be 1, 2 or 3, got {n}"));
        }
        for (name, e) in [("p", self.p), ("q", self.q)] {
            if !(e.is_finite() && e >= 1.0) {
                return bad(format!("exponent {name} must be at least 1, got {e}"));
            }
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if !FIELD_NAMES.contains(&self.field.as_str()) {
            return bad(format!(
                "unknown field {:?}; expected one of {FIELD_NAMES:?}",
                self.field
            ));
        }
        let field =
            field_by_name(&self.field, n).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(r) = self
            .r_schedule
            .iter()
            .find(|r| !(r.is_finite() && **r > 0.0))
        {
            return bad(format!("scales must be positive, got {r}"));
        }
        if let Some(d) = &self.domain {
            d.validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if d.dim() != n || d.is_empty() {
                return bad(format!("domain must be a non-empty box in R^{n}"));
            }
        }
        let t = &self.tolerances;
        if !(t.lemma_residual >= 0.0 && t.bound_constant > 0.0 && t.locate >= 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        if let Some([lo, hi]) = t.grad_ratio {
            if !(lo <= hi) {
                return bad(format!("ratio window [{lo}, {hi}] is empty"));
            }
        }
        match self.command {
            Command::Lemma1 | Command::Lemma2 => {
                if field.class() == FieldClass::BvIndicator {
                    return bad(format!(
                        "{} needs a differentiable field",
                        self.command.name()
                    ));
                }
                if self.simplices == 0 && (self.command == Command::Lemma2 || self.balls == 0) {
                    return bad("no regions to check".into());
                }
            }
            Command::Converge => {
                if field.class() == FieldClass::BvIndicator {
                    return bad("converge needs a differentiable field".into());
                }
                if self.r_schedule.is_empty() {
                    return bad("converge needs a non-empty r_schedule".into());
                }
            }
            Command::Bv => {
                if n != 2 || self.field != "indicator-triangle" {
                    return bad("bv runs the indicator-triangle field in dimension 2".into());
                }
                if self.r_schedule.is_empty() {
                    return bad("bv needs a non-empty r_schedule".into());
                }
            }
            Command::LocateDemo => {
                if self.r_schedule.is_empty() {
                    return bad("locate-demo needs a scale in r_schedule".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(command: &str, extra: &str) -> String {
        format!(r#"{{"command": "{command}", "dimension": 2{extra}}}"#)
    }

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json(&minimal("lemma2", "")).unwrap();
        assert_eq!(c.field, "gaussian");
        assert_eq!((c.p, c.q, c.samples, c.simplices), (2.0, 2.0, 32, 50));
        assert_eq!(c.tolerances.lemma_residual, 1e-8);
        assert_eq!(c.output.dir, PathBuf::from("out"));
    }

    #[test]
    fn rejects_bad_values() {
        for extra in [
            r#", "p": 0.5"#,
            r#", "samples": 0"#,
            r#", "field": "nope""#,
            r#", "r_schedule": [0.1, -1]"#,
            r#", "unknown_key": 1"#,
        ] {
            assert!(
                RunConfig::from_json(&minimal("converge", extra)).is_err(),
                "{extra}"
            );
        }
        assert!(RunConfig::from_json(r#"{"command": "lemma1", "dimension": 4}"#).is_err());
        assert!(RunConfig::from_json(&minimal("converge", "")).is_err());
        assert!(
            RunConfig::from_json(&minimal("lemma1", r#", "field": "indicator-triangle""#)).is_err()
        );
        assert!(RunConfig::from_json(&minimal(
            "bv",
            r#", "field": "gaussian", "r_schedule": [0.1]"#
        ))
        .is_err());
    }
}
