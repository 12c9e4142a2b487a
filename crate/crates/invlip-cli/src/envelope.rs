//! Self-contained report envelopes: every emitted report carries the command,
//! the instance it ran on, and the witnesses needed to re-verify it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{CliError, CliResult};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Envelope {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    /// Echo of the instance inputs the run consumed.
    pub instance: Value,
    /// Serialized approximant, when the command produced one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximant: Option<Value>,
    pub report: Value,
}

/// Reads a file that holds either one envelope or an array of them.
pub fn read_envelopes(path: &Path) -> CliResult<Vec<Envelope>> {
    let text = read_text(path)?;
    let value: Value = parse_json(path, &text)?;
    let envelopes = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value::<Envelope>(value).map(|e| vec![e])
    };
    envelopes.map_err(|e| CliError::Parse(format!("{}: not a report envelope: {e}", path.display())))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

/// Parses JSON with line/column diagnostics in the error message.
pub fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Parse(format!(
            "parse error in {} at line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize")
}

/// Writes deterministic pretty JSON (trailing newline included) to the path,
/// or to stdout when no path is given.
pub fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Parse(format!("serialization failed: {e}")))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
