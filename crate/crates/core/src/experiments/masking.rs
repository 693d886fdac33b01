//! Two-tone interference: renormalized second-order response over a grid of
//! amplitude ratios and relative frequency differences.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::export::{format_sig6, format_value, write_csv};
use crate::filterbank::{build_filterbank, Filterbank, FilterbankSpec, WaveletFamily};
use crate::scattering::{renormalize_second_order, scatter_with, ScatteringOptions};
use crate::svg;
use crate::synthesis::{logspace, two_tone, TwoToneSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskingGridConfig {
    pub family: WaveletFamily,
    pub q: u32,
    pub j: u32,
    pub lambda_max: f64,
    pub signal_len: usize,
    /// cycles/sample; snapped to the nearest DFT bin.
    pub nu1: f64,
    pub amp_steps: usize,
    pub amp_range: (f64, f64),
    pub freq_steps: usize,
    pub freq_range: (f64, f64),
    pub renorm_eps: f64,
}

impl Default for MaskingGridConfig {
    fn default() -> Self {
        MaskingGridConfig {
            family: WaveletFamily::Gammatone,
            q: 4,
            j: 10,
            lambda_max: 0.25,
            signal_len: 32768,
            nu1: 0.2,
            amp_steps: 32,
            amp_range: (1e-3, 1.0),
            freq_steps: 32,
            freq_range: (1e-3, 1.0),
            renorm_eps: crate::scattering::DEFAULT_RENORM_EPS,
        }
    }
}

impl MaskingGridConfig {
    pub fn filterbank_spec(&self) -> FilterbankSpec {
        FilterbankSpec::new(self.family, self.q, self.j, self.signal_len).with_lambda_max(self.lambda_max)
    }

    pub fn validate(&self) -> Result<()> {
        self.filterbank_spec().validate()?;
        if !(self.nu1 > 0.0 && self.nu1 < 0.5) {
            return invalid(format!("nu1 must lie in (0, 0.5), got {}", self.nu1));
        }
        for (name, steps, (lo, hi)) in [
            ("amplitude", self.amp_steps, self.amp_range),
            ("frequency", self.freq_steps, self.freq_range),
        ] {
            if steps == 0 || !(lo > 0.0 && lo <= hi) {
                return invalid(format!("{name} axis needs steps >= 1 and 0 < lo <= hi"));
            }
        }
        Ok(())
    }
}

/// Masking experiment state shared across cells.
pub struct MaskingSetup {
    pub config: MaskingGridConfig,
    pub filterbank: Filterbank,
    pub lambda1_index: usize,
    /// DFT bin of the first tone.
    pub k1: usize,
}

impl MaskingSetup {
    pub fn new(config: MaskingGridConfig) -> Result<Self> {
        config.validate()?;
        let filterbank = build_filterbank(&config.filterbank_spec())?;
        let k1 = (config.nu1 * config.signal_len as f64).round() as usize;
        let lambda1_index = filterbank.nearest_index(config.nu1);
        if lambda1_index + 1 >= filterbank.len() {
            return invalid("no second-layer wavelet lies below the first tone's band");
        }
        Ok(MaskingSetup {
            config,
            filterbank,
            lambda1_index,
            k1,
        })
    }

    pub fn nu1(&self) -> f64 {
        self.k1 as f64 / self.config.signal_len as f64
    }

    pub fn lambda1(&self) -> f64 {
        self.filterbank.lambdas()[self.lambda1_index]
    }

    /// Second-layer center frequencies below `λ1`, largest first.
    pub fn lambda2(&self) -> &[f64] {
        &self.filterbank.lambdas()[self.lambda1_index + 1..]
    }

    /// Bin of the second tone at `ν2 = ν1 − rel_freq·ν1`, or `None` when it
    /// leaves `(0, 0.5)` or coincides with the first tone.
    pub fn k2(&self, rel_freq: f64) -> Option<usize> {
        let l = self.config.signal_len as f64;
        let nu2 = self.nu1() * (1.0 - rel_freq);
        let k2 = (nu2 * l).round();
        if k2 <= 0.0 || k2 >= l / 2.0 || k2 as usize == self.k1 {
            None
        } else {
            Some(k2 as usize)
        }
    }

    /// `S̃2(λ1, λ2)` for every `λ2 < λ1` with `a1 = 1`, or `None` for a masked cell.
    pub fn profile(&self, amp_ratio: f64, rel_freq: f64) -> Result<Option<Vec<f64>>> {
        let Some(k2) = self.k2(rel_freq) else {
            return Ok(None);
        };
        self.profile_bins(amp_ratio, k2).map(Some)
    }

    pub fn profile_bins(&self, amp_ratio: f64, k2: usize) -> Result<Vec<f64>> {
        let l = self.config.signal_len as f64;
        let y = two_tone(&TwoToneSpec {
            a1: 1.0,
            a2: amp_ratio,
            nu1: self.k1 as f64 / l,
            nu2: k2 as f64 / l,
            phi1: 0.0,
            phi2: 0.0,
            signal_len: self.config.signal_len,
        })?;
        let opts = ScatteringOptions {
            first_order: Some(vec![self.lambda1_index]),
            ..ScatteringOptions::new(2)
        };
        let (feat, _) = scatter_with(&y, &self.filterbank, &opts)?;
        if feat.max_order() < 2 {
            return Ok(vec![0.0; self.lambda2().len()]);
        }
        Ok(renormalize_second_order(&feat, self.config.renorm_eps)?
            .into_iter()
            .map(|c| c.value)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskingGridResult {
    pub config: MaskingGridConfig,
    /// Snapped first-tone frequency.
    pub nu1: f64,
    pub lambda1: f64,
    pub lambda2: Vec<f64>,
    pub amp_ratios: Vec<f64>,
    pub rel_freqs: Vec<f64>,
    /// Row-major `amp × freq`; each present cell holds one value per `λ2`.
    pub cells: Vec<Option<Vec<f64>>>,
}

impl MaskingGridResult {
    pub fn cell(&self, amp: usize, freq: usize) -> Option<&[f64]> {
        self.cells[amp * self.rel_freqs.len() + freq].as_deref()
    }

    /// `values[amp][freq]` for one `λ2` index.
    pub fn slice(&self, lambda2_index: usize) -> Vec<Vec<Option<f64>>> {
        (0..self.amp_ratios.len())
            .map(|a| {
                (0..self.rel_freqs.len())
                    .map(|f| self.cell(a, f).map(|v| v[lambda2_index]))
                    .collect()
            })
            .collect()
    }

    /// Largest value over all cells and `λ2`.
    pub fn grid_max(&self) -> f64 {
        self.cells.iter().flatten().flatten().copied().fold(0.0, f64::max)
    }

    /// Per cell, the largest value over `λ2`.
    pub fn peak_map(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.amp_ratios.len())
            .map(|a| {
                (0..self.rel_freqs.len())
                    .map(|f| self.cell(a, f).map(|v| v.iter().copied().fold(0.0, f64::max)))
                    .collect()
            })
            .collect()
    }

    /// Writes `masking_grid.csv` and `masking_grid.svg`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let csv_path = dir.join("masking_grid.csv");
        let header: Vec<String> = ["amp_ratio", "rel_freq", "nu2", "lambda1", "lambda2", "s2_tilde"]
            .map(String::from)
            .to_vec();
        let mut rows = Vec::new();
        for (a, &amp) in self.amp_ratios.iter().enumerate() {
            for (f, &rel) in self.rel_freqs.iter().enumerate() {
                let Some(values) = self.cell(a, f) else {
                    continue;
                };
                let nu2 = self.nu1 * (1.0 - rel);
                for (&l2, &v) in self.lambda2.iter().zip(values) {
                    rows.push(vec![
                        format_value(amp),
                        format_value(rel),
                        format_value(nu2),
                        format_sig6(self.lambda1),
                        format_sig6(l2),
                        format_value(v),
                    ]);
                }
            }
        }
        write_csv(&csv_path, &header, &rows)?;

        let svg_path = dir.join("masking_grid.svg");
        let peaks = self.peak_map();
        // rows of the heatmap are relative frequency, columns amplitude ratio
        let transposed: Vec<Vec<Option<f64>>> = (0..self.rel_freqs.len())
            .map(|f| (0..self.amp_ratios.len()).map(|a| peaks[a][f]).collect())
            .collect();
        let title = format!(
            "max over lambda2 of renormalized S2, lambda1 = {}",
            format_sig6(self.lambda1)
        );
        let plot = svg::heatmap(&svg::Heatmap {
            title: &title,
            xlabel: "a2 / a1",
            ylabel: "|nu2 - nu1| / nu1",
            x_range: (self.amp_ratios[0], *self.amp_ratios.last().expect("nonempty")),
            y_range: (self.rel_freqs[0], *self.rel_freqs.last().expect("nonempty")),
            log_axes: true,
            values: &transposed,
        });
        std::fs::write(&svg_path, plot)?;
        Ok(vec![csv_path, svg_path])
    }
}

pub fn run_masking_grid(config: &MaskingGridConfig) -> Result<MaskingGridResult> {
    let setup = MaskingSetup::new(config.clone())?;
    let amp_ratios = logspace(config.amp_range.0, config.amp_range.1, config.amp_steps);
    let rel_freqs = logspace(config.freq_range.0, config.freq_range.1, config.freq_steps);
    let cells: Vec<(f64, f64)> = amp_ratios
        .iter()
        .flat_map(|&a| rel_freqs.iter().map(move |&f| (a, f)))
        .collect();
    let cells = cells
        .par_iter()
        .map(|&(a, f)| setup.profile(a, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(MaskingGridResult {
        config: config.clone(),
        nu1: setup.nu1(),
        lambda1: setup.lambda1(),
        lambda2: setup.lambda2().to_vec(),
        amp_ratios,
        rel_freqs,
        cells,
    })
}
