use serde::{Deserialize, Serialize};

use super::encoding::EncodingSpec;
use super::model::{Entangler, VqcModel};
use crate::error::{Error, Result};

pub const MODEL_SCHEMA: &str = "vqc-v1";

/// On-disk form of a [`VqcModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCheckpoint {
    pub schema: String,
    pub num_qubits: usize,
    pub depth: usize,
    pub entangler: Entangler,
    pub encoding: EncodingSpec,
    pub params: Vec<f64>,
}

impl From<&VqcModel> for ModelCheckpoint {
    fn from(model: &VqcModel) -> Self {
        Self {
            schema: MODEL_SCHEMA.to_string(),
            num_qubits: model.num_qubits(),
            depth: model.depth(),
            entangler: model.entangler(),
            encoding: *model.encoding(),
            params: model.params().to_vec(),
        }
    }
}

impl ModelCheckpoint {
    pub fn into_model(self) -> Result<VqcModel> {
        if self.schema != MODEL_SCHEMA {
            return Err(Error::Version { expected: MODEL_SCHEMA.into(), found: self.schema });
        }
        let expected = 3 * self.num_qubits * self.depth;
        if self.params.len() != expected {
            return Err(Error::parse(
                "params",
                format!(
                    "expected 3*{}*{} = {expected} values, found {}",
                    self.num_qubits,
                    self.depth,
                    self.params.len()
                ),
            ));
        }
        VqcModel::new(self.num_qubits, self.depth, self.entangler, self.encoding)?.with_params(&self.params)
    }
}

pub(crate) fn json_error(err: serde_json::Error) -> Error {
    Error::parse(format!("line {} column {}", err.line(), err.column()), err.to_string())
}

/// Checks the `"schema"` tag of a JSON document before its body is
/// interpreted, so version skew is reported as such rather than as a
/// missing or unknown field.
pub(crate) fn check_schema(text: &str, expected: &str) -> Result<()> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_error)?;
    match value.get("schema") {
        Some(serde_json::Value::String(found)) if found == expected => Ok(()),
        Some(serde_json::Value::String(found)) => {
            Err(Error::Version { expected: expected.into(), found: found.clone() })
        }
        Some(_) => Err(Error::parse("schema", "schema tag must be a string")),
        None => Err(Error::parse("schema", "missing field `schema`")),
    }
}

pub fn serialize_model(model: &VqcModel) -> String {
    serde_json::to_string_pretty(&ModelCheckpoint::from(model)).expect("checkpoint serializes")
}

pub fn deserialize_model(text: &str) -> Result<VqcModel> {
    check_schema(text, MODEL_SCHEMA)?;
    let checkpoint: ModelCheckpoint = serde_json::from_str(text).map_err(json_error)?;
    checkpoint.into_model()
}
