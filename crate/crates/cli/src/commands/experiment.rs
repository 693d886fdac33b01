use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde_json::json;

use scatterlab::experiments::{
    depth_bound, run_depth_decay, run_embedding_experiment, run_masking_grid, verify_theorem_with,
    DepthDecayConfig, EmbeddingConfig, FeatureSetReport, FeatureTransform, PARAMETER_NAMES,
};
use scatterlab::synthesis::DatasetConfig;
use scatterlab::WaveletFamily;

use super::{parse_family, set};
use crate::config::DepthSettings;
use crate::exit::{classify, output, CliError, CliResult};
use crate::run::{create_dir, Run};

#[derive(Debug, Args)]
pub struct OutDir {
    /// Directory for CSV, SVG and manifest (default: results/<experiment>).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl OutDir {
    fn resolve(&self, name: &str) -> PathBuf {
        self.out_dir
            .clone()
            .unwrap_or_else(|| Path::new("results").join(name))
    }
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCmd {
    /// Renormalized second-order response of two tones over amplitude ratio and frequency gap.
    MaskingGrid {
        #[arg(long, value_parser = parse_family)]
        family: Option<WaveletFamily>,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        j: Option<u32>,
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long)]
        len: Option<usize>,
        /// First tone, cycles/sample (snapped to a DFT bin).
        #[arg(long)]
        nu1: Option<f64>,
        #[arg(long)]
        amp_steps: Option<usize>,
        #[arg(long)]
        amp_min: Option<f64>,
        #[arg(long)]
        amp_max: Option<f64>,
        #[arg(long)]
        freq_steps: Option<usize>,
        #[arg(long)]
        freq_min: Option<f64>,
        #[arg(long)]
        freq_max: Option<f64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Layer energy against depth for harmonic stacks.
    DepthDecay {
        #[command(flatten)]
        depth: DepthArgs,
        #[command(flatten)]
        out: OutDir,
    },
    /// Isomap embeddings of scattering and MFCC features of additive tones.
    Embed {
        /// 20 × 20 grid with cycling fundamentals, K = 50 (the default).
        #[arg(long, conflicts_with = "full")]
        desk_scale: bool,
        /// 50 × 50 grid with random fundamentals, K = 100.
        #[arg(long)]
        full: bool,
        /// Grid steps per axis at desk scale.
        #[arg(long, conflicts_with = "full")]
        steps: Option<usize>,
        /// Neighbours of the kNN graph.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_parser = parse_family)]
        family: Option<WaveletFamily>,
        /// Log-compress features before the embedding.
        #[arg(long)]
        log: bool,
        /// z-score every feature column before the embedding.
        #[arg(long)]
        standardize: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Check that layers past ⌈log2 N⌉ carry negligible energy; exit 3 otherwise.
    VerifyTheorem {
        #[command(flatten)]
        depth: DepthArgs,
        /// Relative energy allowed past the bound.
        #[arg(long)]
        tolerance: Option<f64>,
        #[command(flatten)]
        out: OutDir,
    },
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    /// Harmonic counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    /// Fundamental as a DFT bin index.
    #[arg(long)]
    f1: Option<u32>,
    #[arg(long)]
    len: Option<usize>,
    /// Octaves of the Shannon filterbank.
    #[arg(long)]
    j: Option<u32>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Relative energy counted toward the effective depth.
    #[arg(long)]
    threshold: Option<f64>,
}

impl DepthArgs {
    fn apply(self, d: &mut DepthSettings) {
        set(&mut d.n, self.n);
        set(&mut d.f1, self.f1);
        set(&mut d.signal_len, self.len);
        set(&mut d.j, self.j);
        set(&mut d.max_depth, self.max_depth);
        set(&mut d.threshold, self.threshold);
    }
}

fn depth_config(d: &DepthSettings) -> DepthDecayConfig {
    DepthDecayConfig {
        n_list: d.n.clone(),
        f1: d.f1,
        signal_len: d.signal_len,
        j: d.j,
        max_depth: d.max_depth,
        threshold: d.threshold,
    }
}

impl ExperimentCmd {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentCmd::MaskingGrid { .. } => "masking-grid",
            ExperimentCmd::DepthDecay { .. } => "depth-decay",
            ExperimentCmd::Embed { .. } => "embed",
            ExperimentCmd::VerifyTheorem { .. } => "verify-theorem",
        }
    }
}

fn feature_summary(r: &FeatureSetReport) -> serde_json::Value {
    let per_param: Vec<_> = PARAMETER_NAMES
        .iter()
        .enumerate()
        .map(|(p, name)| {
            json!({
                "parameter": name,
                "axis": r.assignment[p],
                "abs_rho": r.rho[p][r.assignment[p]].abs(),
            })
        })
        .collect();
    json!({
        "n_features": r.n_features,
        "kept": r.isomap.kept.len(),
        "dropped": r.isomap.dropped.len(),
        "assignment": per_param,
        "max_shuffled_abs_rho": r.max_shuffled_abs_rho(),
    })
}

pub fn execute(cmd: ExperimentCmd, mut run: Run) -> CliResult<()> {
    let name = cmd.name();
    match cmd {
        ExperimentCmd::MaskingGrid {
            family,
            q,
            j,
            lambda_max,
            len,
            nu1,
            amp_steps,
            amp_min,
            amp_max,
            freq_steps,
            freq_min,
            freq_max,
            out,
        } => {
            let m = &mut run.config.experiment.masking_grid;
            set(&mut m.family, family);
            set(&mut m.q, q);
            set(&mut m.j, j);
            set(&mut m.lambda_max, lambda_max);
            set(&mut m.signal_len, len);
            set(&mut m.nu1, nu1);
            set(&mut m.amp_steps, amp_steps);
            set(&mut m.amp_min, amp_min);
            set(&mut m.amp_max, amp_max);
            set(&mut m.freq_steps, freq_steps);
            set(&mut m.freq_min, freq_min);
            set(&mut m.freq_max, freq_max);
            let cfg = m.to_config();
            cfg.validate().map_err(classify)?;
            let dir = out.resolve(name);
            create_dir(&dir)?;
            let result = run_masking_grid(&cfg).map_err(classify)?;
            let outputs = result.write(&dir).map_err(output)?;
            let masked = result.cells.iter().filter(|c| c.is_none()).count();
            let summary = json!({
                "nu1": result.nu1,
                "lambda1": result.lambda1,
                "n_lambda2": result.lambda2.len(),
                "cells": result.cells.len(),
                "masked_cells": masked,
                "grid_max": result.grid_max(),
            });
            run.finish(&dir.join("manifest.json"), Some(&dir), outputs, summary)?;
            println!(
                "masking grid {}×{} at ν1 = {:.6}, λ1 = {:.6}: max S̃2 = {:.6e} ({masked} cells masked) → {}",
                result.amp_ratios.len(),
                result.rel_freqs.len(),
                result.nu1,
                result.lambda1,
                result.grid_max(),
                dir.display()
            );
            Ok(())
        }
        ExperimentCmd::DepthDecay { depth, out } => {
            depth.apply(&mut run.config.experiment.depth_decay);
            let cfg = depth_config(&run.config.experiment.depth_decay);
            cfg.validate().map_err(classify)?;
            let dir = out.resolve(name);
            create_dir(&dir)?;
            let result = run_depth_decay(&cfg).map_err(classify)?;
            let outputs = result.write(&dir).map_err(output)?;
            let depths: Vec<_> = result
                .curves
                .iter()
                .map(|c| json!({ "n": c.n, "effective_depth": c.effective_depth, "bound": depth_bound(c.n) }))
                .collect();
            run.finish(&dir.join("manifest.json"), Some(&dir), outputs, json!({ "depths": depths }))?;
            for c in &result.curves {
                println!("N = {:>4}: effective depth {} (bound {})", c.n, c.effective_depth, depth_bound(c.n));
            }
            Ok(())
        }
        ExperimentCmd::Embed {
            desk_scale: _,
            full,
            steps,
            k,
            family,
            log,
            standardize,
            out,
        } => {
            let seed = run.seed();
            let e = &mut run.config.experiment.embed;
            e.full |= full;
            set(&mut e.desk_steps, steps);
            if k.is_some() {
                e.k = k;
            }
            set(&mut e.family, family);
            e.log |= log;
            e.standardize |= standardize;
            let mut cfg = if e.full {
                EmbeddingConfig::full(seed)
            } else {
                EmbeddingConfig {
                    dataset: DatasetConfig::desk(e.desk_steps),
                    shuffle_seed: seed,
                    ..EmbeddingConfig::desk()
                }
            };
            if let Some(k) = e.k {
                cfg.k = k;
            }
            cfg.family = e.family;
            cfg.transform = FeatureTransform {
                log: e.log,
                standardize: e.standardize,
            };
            if cfg.dataset.is_empty() {
                return Err(CliError::usage("dataset grid is empty"));
            }
            let dir = out.resolve(name);
            create_dir(&dir)?;
            let report = run_embedding_experiment(&cfg).map_err(classify)?;
            let outputs = report.write(&dir).map_err(output)?;
            let summary = json!({
                "n_signals": report.labels.len(),
                "k": cfg.k,
                "scattering": feature_summary(&report.scattering),
                "mfcc": feature_summary(&report.mfcc),
            });
            run.finish(&dir.join("manifest.json"), Some(&dir), outputs, summary)?;
            for r in [&report.scattering, &report.mfcc] {
                let parts: Vec<String> = PARAMETER_NAMES
                    .iter()
                    .zip(r.assigned_abs_rho())
                    .zip(&r.assignment)
                    .map(|((p, rho), a)| format!("{p} → axis {a} |ρ| = {rho:.3}"))
                    .collect();
                println!("{:<10} {}", r.name, parts.join(", "));
            }
            Ok(())
        }
        ExperimentCmd::VerifyTheorem { mut depth, tolerance, out } => {
            let t = &mut run.config.experiment.verify_theorem;
            set(&mut t.n, depth.n.take());
            set(&mut t.tolerance, tolerance);
            let (tol, n_list) = (t.tolerance, t.n.clone());
            depth.apply(&mut run.config.experiment.depth_decay);
            let cfg = DepthDecayConfig {
                n_list,
                ..depth_config(&run.config.experiment.depth_decay)
            };
            cfg.validate().map_err(classify)?;
            if !(tol >= 0.0) {
                return Err(CliError::usage("--tolerance must be nonnegative"));
            }
            let dir = out.resolve(name);
            create_dir(&dir)?;
            let report = verify_theorem_with(&cfg, tol).map_err(classify)?;
            let outputs = report.write(&dir).map_err(output)?;
            let summary = json!({
                "passed": report.passed(),
                "tolerance": tol,
                "max_beyond_bound": report.max_beyond_bound,
                "violations": report.violations,
            });
            run.finish(&dir.join("manifest.json"), Some(&dir), outputs, summary)?;
            for (n, v) in &report.max_beyond_bound {
                println!("N = {n:>4}: bound {}, max relative energy past it {v:.3e}", depth_bound(*n));
            }
            if report.passed() {
                println!("pass at tolerance {tol:e}");
                Ok(())
            } else {
                let list: Vec<String> = report
                    .violations
                    .iter()
                    .map(|v| format!("(N={}, m={}, {:.3e})", v.n, v.m, v.value))
                    .collect();
                Err(CliError::Verification(list.join(", ")))
            }
        }
    }
}
