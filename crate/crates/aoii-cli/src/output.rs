use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// '#' metadata preamble, then a header row, then data rows. Everything in
/// the document is a pure function of the resolved settings, so reruns are
/// byte-identical.
pub fn csv_document(config_sha256: &str, header: &str, rows: &[String]) -> String {
    let mut doc = String::new();
    doc.push_str(&format!(
        "# aoii schema={SCHEMA} version={}\n",
        env!("CARGO_PKG_VERSION")
    ));
    doc.push_str(&format!("# config_sha256={config_sha256}\n"));
    doc.push_str(header);
    doc.push('\n');
    for row in rows {
        doc.push_str(row);
        doc.push('\n');
    }
    doc
}

pub fn json_document(config_sha256: &str, command: &str, body: Value) -> String {
    let doc = serde_json::json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config_sha256": config_sha256,
        "result": body,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json serialization");
    text.push('\n');
    text
}

/// CSV cell for an optional value; absent prints as the empty field.
pub fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}
