//! File input and output in the JSON exchange formats.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qemtk_core::matrep::json::{channel_from_json, operator_from_json};
use qemtk_core::matrep::{ChannelRep, ComplexMatrix};
use serde_json::Value;

use crate::error::{CliError, Context};

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, &e))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::usage(
            "Parse",
            format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()),
        )
    })
}

pub fn load_channel(path: &Path) -> Result<ChannelRep, CliError> {
    channel_from_json(&read_json(path)?).context(path.display())
}

pub fn load_operator(path: &Path) -> Result<ComplexMatrix, CliError> {
    operator_from_json(&read_json(path)?).context(path.display())
}

/// Directory that relative paths inside `path` are resolved against.
pub fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn write_text(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, &e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), &e))
        }
    }
}

/// Pretty JSON with a trailing newline. Floats use the shortest text that
/// parses back to the identical `f64`.
pub fn emit(value: &Value, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialise");
    text.push('\n');
    write_text(&text, out)
}
