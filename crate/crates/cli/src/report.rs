use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::Settings;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported value with no pass/fail meaning.
    Info,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

/// One line of `report.csv`.
#[derive(Debug, Clone)]
pub struct Row {
    pub module: &'static str,
    pub operation: &'static str,
    /// The inequality or quantity, e.g. `max residual <= 1e-6`.
    pub check: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub status: Status,
    /// Worst-case location, free text.
    pub location: String,
}

#[derive(Debug, Default)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    /// Row that passes iff `value <= bound`.
    pub fn at_most(
        &mut self,
        module: &'static str,
        op: &'static str,
        check: &str,
        value: f64,
        bound: f64,
        location: String,
    ) {
        let status = if value <= bound { Status::Pass } else { Status::Fail };
        self.rows.push(Row { module, operation: op, check: check.into(), value, bound: Some(bound), status, location });
    }

    /// Row that passes iff `value >= bound`.
    pub fn at_least(
        &mut self,
        module: &'static str,
        op: &'static str,
        check: &str,
        value: f64,
        bound: f64,
        location: String,
    ) {
        let status = if value >= bound { Status::Pass } else { Status::Fail };
        self.rows.push(Row { module, operation: op, check: check.into(), value, bound: Some(bound), status, location });
    }

    pub fn flag(
        &mut self,
        module: &'static str,
        op: &'static str,
        check: &str,
        value: f64,
        pass: bool,
        location: String,
    ) {
        let status = if pass { Status::Pass } else { Status::Fail };
        self.rows.push(Row { module, operation: op, check: check.into(), value, bound: None, status, location });
    }

    pub fn info(&mut self, module: &'static str, op: &'static str, check: &str, value: f64, location: String) {
        self.rows.push(Row {
            module,
            operation: op,
            check: check.into(),
            value,
            bound: None,
            status: Status::Info,
            location,
        });
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status == Status::Fail).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("module,operation,check,value,bound,status,location\n");
        for r in &self.rows {
            let bound = r.bound.map_or_else(String::new, |b| format!("{b:.6e}"));
            let _ = writeln!(
                s,
                "{},{},{},{:.10e},{},{},{}",
                r.module,
                r.operation,
                quote(&r.check),
                r.value,
                bound,
                r.status.as_str(),
                quote(&r.location)
            );
        }
        s
    }
}

/// Quote a CSV field when it contains a separator or a quote.
fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// What ran and with which inputs. Contains nothing time- or host-dependent,
/// so repeated runs produce identical files.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<String>,
    pub out: String,
    pub seed: u64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, settings: &Settings) -> Self {
        Self {
            command: command.to_string(),
            config: settings.config.as_ref().map(|p| p.display().to_string()),
            out: settings.out.display().to_string(),
            seed: settings.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn render(&self, settings: &Settings) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# command={}", self.command);
        let _ = writeln!(s, "# version={}", self.version);
        let _ = writeln!(s, "# config={}", self.config.as_deref().unwrap_or("none"));
        for line in settings.to_config_lines() {
            let _ = writeln!(s, "{line}");
        }
        s
    }
}

pub fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}
