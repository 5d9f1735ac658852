use marketdyn_core::Error;

/// Everything the command line can fail with. [`CliError::exit_code`]
/// maps each to the process status: 2 for bad input, 3 for numeric
/// failures, 4 for infeasible calibration targets, 1 for I/O.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The document does not match the scenario format. `code` is one of
    /// `syntax`, `unknown_kind`, `missing_field`, `unknown_field`,
    /// `wrong_type`.
    #[error("{path}: {message} [{code}]")]
    Parse {
        code: &'static str,
        path: String,
        message: String,
    },

    #[error("invalid scenario: {0}")]
    Invalid(String),

    #[error(transparent)]
    Model(#[from] Error),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn invalid(msg: String) -> Self {
        CliError::Invalid(msg)
    }

    pub fn from_parse(e: serde_path_to_error::Error<serde_json::Error>) -> Self {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = inner.to_string();
        let code = if inner.is_syntax() || inner.is_eof() {
            "syntax"
        } else if message.starts_with("unknown variant") {
            "unknown_kind"
        } else if message.starts_with("missing field") {
            "missing_field"
        } else if message.starts_with("unknown field") {
            "unknown_field"
        } else {
            "wrong_type"
        };
        CliError::Parse { code, path, message }
    }

    /// Prefixes the location, for errors inside a batch.
    pub fn within(self, prefix: &str) -> Self {
        match self {
            CliError::Parse { code, path, message } => CliError::Parse {
                code,
                path: if path == "." { prefix.to_string() } else { format!("{prefix}.{path}") },
                message,
            },
            CliError::Invalid(m) => CliError::Invalid(format!("{prefix}: {m}")),
            CliError::Model(e) => CliError::Invalid(format!("{prefix}: {e}")),
            other => other,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Invalid(_) => 2,
            CliError::Io(_) => 1,
            CliError::Model(e) => match e {
                Error::CalibrationInfeasible(_) => 4,
                Error::InvalidParameter { .. }
                | Error::DimensionMismatch { .. }
                | Error::Initiation(_)
                | Error::InvalidTrajectory(_) => 2,
                _ => 3,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
