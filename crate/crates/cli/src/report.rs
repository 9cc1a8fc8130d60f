//! Report envelope: tool identity, input descriptors, settings, result and
//! warnings.

use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use krein::linalg::{CMat, CVec};

use crate::error::CliError;
use crate::io;

/// A loaded input file and its descriptor.
pub struct Input {
    pub role: &'static str,
    pub path: String,
    pub sha256: String,
    pub value: Value,
}

impl Input {
    pub fn load(role: &'static str, path: &Path) -> Result<Self, CliError> {
        let shown = path.display().to_string();
        let bytes = fs::read(path).map_err(|e| {
            CliError::validation("unreadable_input", format!("cannot read {shown}: {e}"))
                .with_path(&shown)
        })?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| {
            CliError::validation("malformed_json", "input is not UTF-8").with_path(&shown)
        })?;
        let value = io::parse_json(&text, &shown)?;
        Ok(Self {
            role,
            sha256: format!("{:x}", Sha256::digest(&bytes)),
            path: shown,
            value,
        })
    }

    pub fn matrix(&self) -> Result<CMat, CliError> {
        io::matrix_from_value(&self.value, &self.path)
    }

    pub fn vector(&self) -> Result<CVec, CliError> {
        io::vector_from_value(&self.value, &self.path)
    }

    pub fn field(&self, key: &str) -> Result<&Value, CliError> {
        self.value.get(key).ok_or_else(|| {
            CliError::validation("invalid_input", format!("missing field {key:?}")).with_path(&self.path)
        })
    }
}

/// Finite numbers as JSON numbers; `+∞` as "divergent" and NaN as
/// "not-applicable".
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("not-applicable")
    } else if x > 0.0 {
        json!("divergent")
    } else {
        json!("-divergent")
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or_else(|| json!("not-applicable"), num)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::from(xs.iter().map(|&x| num(x)).collect::<Vec<_>>())
}

pub struct Report {
    command: &'static str,
    inputs: Vec<Value>,
    tolerance: f64,
    seed: Option<u64>,
    warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, tolerance: f64) -> Self {
        Self {
            command,
            inputs: Vec::new(),
            tolerance,
            seed: None,
            warnings: Vec::new(),
        }
    }

    pub fn input(&mut self, input: &Input, dims: (usize, usize)) {
        self.inputs.push(json!({
            "role": input.role,
            "path": input.path,
            "rows": dims.0,
            "cols": dims.1,
            "sha256": input.sha256,
        }));
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn warn(&mut self, warning: impl Into<String>) {
        let warning = warning.into();
        if !self.warnings.contains(&warning) {
            self.warnings.push(warning);
        }
    }

    pub fn finish(self, result: Value) -> Value {
        let mut out = Map::new();
        out.insert(
            "tool".into(),
            json!({"name": "krein", "version": env!("CARGO_PKG_VERSION")}),
        );
        out.insert("command".into(), json!(self.command));
        out.insert("inputs".into(), Value::from(self.inputs));
        out.insert("tolerance".into(), num(self.tolerance));
        out.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        out.insert("result".into(), result);
        out.insert("warnings".into(), json!(self.warnings));
        Value::Object(out)
    }
}
