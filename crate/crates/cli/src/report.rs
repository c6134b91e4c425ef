use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Partial,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Partial => 1,
            Status::Failed => 2,
        }
    }
}

/// Machine-readable record of one invocation. Contains no timings, so a
/// repeated run produces the same report.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub status: Status,
    pub exit_code: u8,
    pub config: RunConfig,
    pub inputs: BTreeMap<String, PathBuf>,
    pub outputs: BTreeMap<String, PathBuf>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub summary: Value,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    pub fn new(command: &str, config: RunConfig) -> Self {
        RunReport {
            tool: "cskit",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            status: Status::Ok,
            exit_code: 0,
            config,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            summary: Value::Null,
            warnings: Vec::new(),
            error: None,
        }
    }

    pub fn input(&mut self, name: &str, path: &Path) {
        self.inputs.insert(name.to_string(), path.to_path_buf());
    }

    pub fn output(&mut self, name: &str, path: &Path) {
        self.outputs.insert(name.to_string(), path.to_path_buf());
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        log::warn!("{message}");
        self.warnings.push(message);
    }

    /// Downgrades an ok run to partial.
    pub fn partial(&mut self) {
        if self.status == Status::Ok {
            self.status = Status::Partial;
        }
    }

    pub fn fail(&mut self, error: &anyhow::Error) {
        self.status = Status::Failed;
        self.error = Some(format!("{error:#}"));
    }

    pub fn write(&mut self, path: &Path) -> anyhow::Result<()> {
        self.exit_code = self.status.exit_code();
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Where the report goes: an explicit path, else next to the main output,
/// else the working directory.
pub fn report_path(explicit: Option<&Path>, main_output: Option<&Path>, command: &str) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match main_output {
        Some(out) => {
            let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
            name.push(".report.json");
            out.with_file_name(name)
        }
        None => PathBuf::from(format!("cskit-{command}.report.json")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths() {
        assert_eq!(
            report_path(None, Some(Path::new("out/d.jsonl")), "detect"),
            PathBuf::from("out/d.jsonl.report.json")
        );
        assert_eq!(report_path(None, None, "mexa"), PathBuf::from("cskit-mexa.report.json"));
        assert_eq!(
            report_path(Some(Path::new("r.json")), Some(Path::new("x")), "detect"),
            PathBuf::from("r.json")
        );
    }

    #[test]
    fn status_codes() {
        let mut r = RunReport::new("stats", RunConfig::default());
        r.partial();
        assert_eq!(r.status, Status::Partial);
        r.fail(&anyhow::anyhow!("boom"));
        r.partial();
        assert_eq!(r.status.exit_code(), 2);
    }
}
