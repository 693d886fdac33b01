//! Per-run bookkeeping: effective config and manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::RunConfig;
use crate::exit::{output, CliError, CliResult};

pub struct Run {
    pub subcommand: String,
    pub config: RunConfig,
    argv: Vec<String>,
    started: Instant,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    argv: &'a [String],
    subcommand: &'a str,
    seed: u64,
    jobs: Option<usize>,
    config: &'a RunConfig,
    elapsed_seconds: f64,
    outputs: Vec<String>,
    summary: serde_json::Value,
}

impl Run {
    pub fn new(subcommand: String, config: RunConfig) -> Self {
        Run {
            subcommand,
            config,
            argv: std::env::args().collect(),
            started: Instant::now(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.config.seed.unwrap_or(0)
    }

    /// Writes `manifest_path`, and `effective_config.toml` beside it when
    /// `config_dir` is given.
    pub fn finish(
        &self,
        manifest_path: &Path,
        config_dir: Option<&Path>,
        mut outputs: Vec<PathBuf>,
        summary: serde_json::Value,
    ) -> CliResult<()> {
        if let Some(dir) = config_dir {
            let p = dir.join("effective_config.toml");
            std::fs::write(&p, self.config.to_toml()).map_err(output)?;
            outputs.push(p);
        }
        let manifest = Manifest {
            tool: "scatterlab",
            version: env!("CARGO_PKG_VERSION"),
            argv: &self.argv,
            subcommand: &self.subcommand,
            seed: self.seed(),
            jobs: self.config.jobs,
            config: &self.config,
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            summary,
        };
        scatterlab::export::write_json(manifest_path, &manifest).map_err(output)
    }
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::usage(format!("cannot create output directory {}: {e}", dir.display())))
}
