use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use lct_numra::report::ConditionResidual;
use serde::Serialize;

use crate::config::RunConfig;

/// Envelope shared by every JSON report.
#[derive(Debug, Serialize)]
pub struct Report<'a, D: Serialize> {
    pub command: &'a str,
    pub config_hash: String,
    pub config: &'a RunConfig,
    pub tolerances: &'a BTreeMap<String, f64>,
    pub conditions: Vec<ConditionResidual>,
    pub passed: bool,
    pub details: D,
}

impl<'a, D: Serialize> Report<'a, D> {
    pub fn new(command: &'a str, cfg: &'a RunConfig, conditions: Vec<ConditionResidual>, details: D) -> Self {
        let passed = conditions.iter().all(|c| c.pass);
        Self { command, config_hash: cfg.hash(), config: cfg, tolerances: &cfg.tolerances, conditions, passed, details }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        lct_numra::io::write_json(path, self)?;
        Ok(())
    }
}
