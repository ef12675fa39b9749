//! Persisting an experiment: CSV tables, a verdict table and a summary.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};

use crate::config::ExperimentConfig;
use crate::experiments::{execute, Outcome};

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config_hash: String,
    /// Seconds since the Unix epoch; recorded in the summary only, so the CSV
    /// bytes depend on the config alone.
    pub timestamp: u64,
    pub files: Vec<PathBuf>,
    pub outcome: Outcome,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.outcome.passed()
    }

    pub fn summary(&self, cfg: &ExperimentConfig) -> String {
        let mut s = format!(
            "experiment {}\nscenario {}\nconfig_hash {}\ntimestamp {}\n",
            cfg.experiment.name(),
            cfg.scenario.as_deref().unwrap_or("-"),
            self.config_hash,
            self.timestamp
        );
        for v in &self.outcome.verdicts {
            s.push_str(&format!("{} {} {}\n", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail));
        }
        s.push_str(if self.passed() { "status pass\n" } else { "status fail\n" });
        s
    }
}

/// Executes a validated config and writes its tables under `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunRecord> {
    let outcome = execute(cfg);
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut files = Vec::new();
    for t in outcome.tables.iter().chain(std::iter::once(&outcome.verdict_table())) {
        t.write(out)?;
        files.push(out.join(format!("{}.csv", t.name)));
    }
    std::fs::write(out.join("config.toml"), cfg.canonical())?;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let record = RunRecord { config_hash: cfg.hash(), timestamp, files, outcome };
    std::fs::write(out.join("summary.txt"), record.summary(cfg))?;
    Ok(record)
}
