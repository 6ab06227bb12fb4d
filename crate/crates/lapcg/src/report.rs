//! JSON envelope shared by every command. Field layout is described in
//! `docs/report-schema.md`.

use serde::Serialize;

use crate::CliError;

pub const TOOL: &str = "lapcg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Report<'a, C, R> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a C,
    pub results: R,
}

impl<'a, C: Serialize, R: Serialize> Report<'a, C, R> {
    pub fn new(command: &'static str, config: &'a C, results: R) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command,
            config,
            results,
        }
    }

    /// Pretty-printed with a trailing newline.
    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
