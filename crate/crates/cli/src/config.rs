//! The JSON experiment config and its flag overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use vqclab_core::qrl::QrlConfig;
use vqclab_core::MeasurementConfig;

use crate::error::{CliError, CliResult};

pub const CONFIG_SCHEMA: &str = "vqclab-config-v1";
pub const DEFAULT_OUT_DIR: &str = "vqclab-out";

/// Largest register `grad-check` accepts unless the config raises it.
pub const GRAD_CHECK_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub grad_check: GradCheckConfig,
    #[serde(default)]
    pub train_qrl: QrlConfig,
    #[serde(default)]
    pub quanv: QuanvConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema: CONFIG_SCHEMA.to_string(),
            seed: None,
            out: None,
            grad_check: GradCheckConfig::default(),
            train_qrl: QrlConfig::default(),
            quanv: QuanvConfig::default(),
        }
    }
}

/// Parameter-shift against finite differences on random models. Each model
/// draws its width from `1..=qubits` and its depth from `1..=depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradCheckConfig {
    pub models: usize,
    pub qubits: usize,
    pub depth: usize,
    pub h: f64,
    pub tolerance: f64,
    pub max_qubits: usize,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self { models: 100, qubits: 4, depth: 3, h: 1e-4, tolerance: 1e-5, max_qubits: GRAD_CHECK_MAX_QUBITS }
    }
}

impl GradCheckConfig {
    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Validation(format!("grad_check.{msg}")));
        if self.models == 0 {
            return bad("models: must be positive".into());
        }
        if self.qubits == 0 {
            return bad("qubits: must be positive".into());
        }
        if self.depth == 0 {
            return bad("depth: must be positive".into());
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad(format!("tolerance: must be positive, got {}", self.tolerance));
        }
        if !(1e-6..=1e-2).contains(&self.h) {
            return bad(format!("h: must lie in [1e-6, 1e-2], got {}", self.h));
        }
        if self.qubits > self.max_qubits {
            return Err(CliError::Runtime(format!(
                "resource limit: grad-check on {} qubits exceeds its cap of {} qubits",
                self.qubits, self.max_qubits
            )));
        }
        Ok(())
    }
}

/// A random fixed filter slid over a CSV feature map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuanvConfig {
    pub kernel: usize,
    pub stride: usize,
    pub depth: usize,
    pub input_min: f64,
    pub input_max: f64,
    pub measurement: MeasurementConfig,
}

impl Default for QuanvConfig {
    fn default() -> Self {
        Self {
            kernel: 2,
            stride: 2,
            depth: 1,
            input_min: 0.0,
            input_max: 1.0,
            measurement: MeasurementConfig::Analytic,
        }
    }
}

impl QuanvConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.kernel == 0 || self.stride == 0 {
            return Err(CliError::Validation("quanv.kernel and quanv.stride must be positive".into()));
        }
        self.measurement.validate()?;
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| json_error("config", &e))?;
        match value.get("schema") {
            Some(serde_json::Value::String(found)) if found == CONFIG_SCHEMA => {}
            Some(serde_json::Value::String(found)) => {
                return Err(CliError::Validation(format!("config schema: expected {CONFIG_SCHEMA:?}, found {found:?}")))
            }
            _ => {
                return Err(CliError::Validation(format!("config: missing string field `schema` ({CONFIG_SCHEMA:?})")))
            }
        }
        serde_json::from_str(text).map_err(|e| json_error("config", &e))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

fn json_error(what: &str, err: &serde_json::Error) -> CliError {
    CliError::Validation(format!("{what}: {err}"))
}
