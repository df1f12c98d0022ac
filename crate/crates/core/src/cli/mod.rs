//! Command-line harness: scenario parsing, dispatch and report emission.

mod commands;
mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub use commands::execute;
pub use scenario::{parse_config, parse_scenario, CommandKind, OutputFormat, OutputSpec, Request, Scenario, SimMetric};

use crate::error::{Error, Result};

/// Version tag carried by every report.
pub const SCHEMA: &str = "klein-billiards/report/v1";

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "KLEIN_BILLIARDS_OUT";

/// Structured result of one command, plus an optional delimited table.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: CommandKind,
    pub body: Value,
    pub table: Option<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("report serializes")
    }
}

/// Writes `<command>.json` and, when present, `<command>.csv` into the output
/// directory (flag, then environment). Returns the written paths.
pub fn emit_report(report: &Report, output: &OutputSpec) -> Result<Vec<PathBuf>> {
    let dir = match &output.dir {
        Some(d) => d.clone(),
        None => match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(d) => PathBuf::from(d),
            None => return Ok(Vec::new()),
        },
    };
    std::fs::create_dir_all(&dir)?;
    let stem = report.command.name();
    let mut written = Vec::new();
    let json_path = dir.join(format!("{stem}.json"));
    write_file(&json_path, &(report.to_json() + "\n"))?;
    written.push(json_path);
    if let Some(table) = &report.table {
        let csv_path = dir.join(format!("{stem}.csv"));
        write_file(&csv_path, table)?;
        written.push(csv_path);
    }
    Ok(written)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Machine-readable error block.
pub fn error_block(e: &Error) -> Value {
    json!({
        "schema": SCHEMA,
        "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() },
    })
}

/// Runs the harness on `argv` (including the program name), writing to
/// `out`. Returns the process exit status.
pub fn run(argv: &[String], out: &mut dyn Write) -> i32 {
    let scenario = match parse_scenario(argv) {
        Ok(s) => s,
        Err(Error::Parse(msg)) if msg.starts_with("help:") => {
            let _ = out.write_all(msg.trim_start_matches("help:").as_bytes());
            return 0;
        }
        Err(e) => return fail(&e, out),
    };
    let report = match execute(&scenario) {
        Ok(r) => r,
        Err(e) => return fail(&e, out),
    };
    if let Err(e) = emit_report(&report, &scenario.output) {
        return fail(&e, out);
    }
    let text = match (scenario.output.format, &report.table) {
        (OutputFormat::Table, Some(t)) => t.clone(),
        _ => report.to_json() + "\n",
    };
    let _ = out.write_all(text.as_bytes());
    0
}

fn fail(e: &Error, out: &mut dyn Write) -> i32 {
    let text = serde_json::to_string_pretty(&error_block(e)).expect("error serializes");
    let _ = writeln!(out, "{text}");
    e.exit_code()
}
