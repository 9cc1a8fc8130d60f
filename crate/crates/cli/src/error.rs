//! Errors and their mapping to exit codes and the machine-readable error
//! object written to stderr.

use serde::Serialize;

use krein::KreinError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// Bad input: exit code 2.
    Validation,
    /// Failure inside the computation: exit code 1.
    Internal,
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub severity: Severity,
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl CliError {
    pub fn validation(kind: &str, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Validation,
            kind: kind.to_string(),
            message: message.into(),
            path: None,
            line: None,
            column: None,
        }
    }

    pub fn internal(kind: &str, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Internal,
            ..Self::validation(kind, message)
        }
    }

    pub fn malformed(path: &str, err: &serde_json::Error) -> Self {
        Self {
            line: Some(err.line()),
            column: Some(err.column()),
            ..Self::validation("malformed_json", err.to_string()).with_path(path)
        }
    }

    pub fn with_path(mut self, path: &str) -> Self {
        self.path = Some(path.to_string());
        self
    }

    pub fn exit_code(&self) -> i32 {
        match self.severity {
            Severity::Validation => 2,
            Severity::Internal => 1,
        }
    }
}

fn kind_of(err: &KreinError) -> &'static str {
    use KreinError::*;
    match err {
        DimensionMismatch { .. } | NotSquare { .. } | ParameterShape { .. } => "dimension_mismatch",
        RankDeficient { .. } | NotSpanning { .. } | ZeroVector { .. } => "rank_deficient",
        NotHermitian { .. } | NotFundamentalSymmetry { .. } | TrivialSymmetry { .. } => {
            "invalid_fundamental_symmetry"
        }
        InvalidTransition(_) | NotContraction { .. } => "invalid_transition",
        NotMaximalDualPair(_) | SingularGraph => "invalid_subspace_pair",
        GeneratorNotAnticommuting { .. } | GeneratorNotHermitian { .. } => "invalid_generator",
        NotInvolution { .. } | MetricNotHermitian { .. } | MetricNotPositive { .. } => {
            "invalid_c_operator"
        }
        NotJSelfAdjoint { .. } | NotJNonnegative { .. } | KernelNonempty { .. } => {
            "precondition_failed"
        }
        NotCommuting { .. } | NoCSymmetry(_) => "no_csymmetry",
        NotJOrthogonal { .. } | NeutralEigenvector | DegenerateComplement => "invalid_eigensystem",
        WindowTooSmall { .. } | InvalidGrid(_) | InvalidInput(_) => "invalid_input",
        Singular => "singular",
        Numerical(_) => "numerical",
    }
}

impl From<KreinError> for CliError {
    fn from(err: KreinError) -> Self {
        let kind = kind_of(&err);
        match err {
            KreinError::Numerical(_) => Self::internal(kind, err.to_string()),
            _ => Self::validation(kind, err.to_string()),
        }
    }
}
