use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

/// Ordered plain-text report. Identical inputs give identical bytes.
#[derive(Debug)]
pub struct Report {
    command: String,
    config: Value,
    lines: Vec<String>,
    checks: usize,
    failed: usize,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Report {
            command: command.to_string(),
            config,
            lines: Vec::new(),
            checks: 0,
            failed: 0,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, metric: impl AsRef<str>) {
        self.checks += 1;
        self.failed += usize::from(!passed);
        let verdict = if passed { "PASS" } else { "FAIL" };
        self.lines.push(format!("CHECK {name} {verdict} {}", metric.as_ref()));
    }

    /// A pre-formatted `CHECK` line.
    pub fn check_line(&mut self, line: String, passed: bool) {
        self.checks += 1;
        self.failed += usize::from(!passed);
        self.lines.push(line);
    }

    pub fn info(&mut self, key: &str, value: impl AsRef<str>) {
        self.lines.push(format!("INFO {key} {}", value.as_ref()));
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# stitchkit {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# config: {}", self.config);
        for l in &self.lines {
            let _ = writeln!(s, "{l}");
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "RESULT {verdict} checks={} failed={}", self.checks, self.failed);
        s
    }

    pub fn emit(&self, out: Option<&Path>) -> std::io::Result<()> {
        let text = self.render();
        print!("{text}");
        if let Some(p) = out {
            std::fs::write(p, text)?;
        }
        Ok(())
    }
}
