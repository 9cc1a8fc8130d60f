//! Settings shared by all subcommands: command-line flags first, then the
//! `KREIN_TOL` environment variable (tolerance only), then the optional
//! TOML config file, then built-in defaults.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use krein::models::Orientation;
use krein::space::DEFAULT_TOL;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 0;

/// Keys mirror the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Config {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub orientation: Option<Orientation>,
    pub length: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
    pub xi_window: Option<f64>,
    pub quad_points: Option<usize>,
    pub samples: Option<usize>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let shown = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::validation("unreadable_input", format!("cannot read {shown}: {e}"))
                .with_path(&shown)
        })?;
        toml::from_str(&text).map_err(|e| {
            let mut err = CliError::validation("malformed_config", e.message().to_string())
                .with_path(&shown);
            if let Some(span) = e.span() {
                let before = &text[..span.start];
                err.line = Some(before.matches('\n').count() + 1);
                err.column = Some(span.start - before.rfind('\n').map_or(0, |p| p + 1) + 1);
            }
            err
        })
    }

    pub fn tolerance(&self, flag: Option<f64>) -> Result<f64, CliError> {
        let env = match std::env::var("KREIN_TOL") {
            Ok(text) => Some(text.trim().parse::<f64>().map_err(|_| {
                CliError::validation("invalid_input", format!("KREIN_TOL is not a number: {text:?}"))
            })?),
            Err(_) => None,
        };
        let tol = flag.or(env).or(self.tol).unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(CliError::validation(
                "invalid_input",
                format!("tolerance must lie in (0, 1), got {tol}"),
            ));
        }
        Ok(tol)
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(DEFAULT_SEED)
    }
}
