use std::path::Path;

use qemtk_core::Error as CoreError;
use serde_json::{json, Value};

/// Everything that can stop a command, with the context shown to the user.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input files.
    Usage {
        error: String,
        context: String,
    },
    Core {
        source: CoreError,
        context: String,
    },
}

impl CliError {
    pub fn usage(error: impl Into<String>, context: impl Into<String>) -> Self {
        Self::Usage {
            error: error.into(),
            context: context.into(),
        }
    }

    pub fn io(path: &Path, err: &std::io::Error) -> Self {
        Self::usage("Io", format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage { .. } => 2,
            Self::Core { source, .. } if source.is_numerical() => 3,
            Self::Core { .. } => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Usage { error, context } => json!({ "error": error, "context": context }),
            Self::Core { source, context } => json!({
                "error": variant_name(source),
                "context": if context.is_empty() { source.to_string() } else { format!("{context}: {source}") },
            }),
        }
    }
}

/// `NonInvertibleChannel(1e-17)` → `NonInvertibleChannel`.
fn variant_name(e: &CoreError) -> String {
    let debug = format!("{e:?}");
    debug
        .split(|c: char| !c.is_alphanumeric() && c != '_')
        .next()
        .unwrap_or_default()
        .to_string()
}

impl From<CoreError> for CliError {
    fn from(source: CoreError) -> Self {
        Self::Core {
            source,
            context: String::new(),
        }
    }
}

pub trait Context<T> {
    fn context(self, ctx: impl std::fmt::Display) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn context(self, ctx: impl std::fmt::Display) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            source,
            context: ctx.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_and_names() {
        let numerical: CliError = CoreError::ClusterAmbiguity(1e-8).into();
        assert_eq!(numerical.exit_code(), 3);
        let domain = Err::<(), _>(CoreError::NonInvertibleChannel(0.0))
            .context("a.json")
            .unwrap_err();
        assert_eq!(domain.exit_code(), 2);
        assert_eq!(domain.to_json()["error"], "NonInvertibleChannel");
        assert!(domain.to_json()["context"]
            .as_str()
            .unwrap()
            .starts_with("a.json: "));
        let dims: CliError = CoreError::DimensionMismatch {
            dim_in: 2,
            dim_out: 3,
        }
        .into();
        assert_eq!(dims.to_json()["error"], "DimensionMismatch");
    }
}
