//! Layer energy against depth for exact-bin harmonic stacks under a
//! complex Shannon filterbank, and the bandwidth bound on effective depth.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::export::{format_value, write_csv};
use crate::filterbank::{build_filterbank, Filterbank, FilterbankSpec, WaveletFamily};
use crate::scattering::{layer_energy, scatter_with, ScatteringOptions};
use crate::svg;
use crate::synthesis::{harmonic_stack, HarmonicStackSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthDecayConfig {
    pub n_list: Vec<u32>,
    /// Fundamental, DFT bins.
    pub f1: u32,
    pub signal_len: usize,
    pub j: u32,
    pub max_depth: usize,
    /// Relative energy above which a layer counts toward the effective depth.
    pub threshold: f64,
}

impl Default for DepthDecayConfig {
    fn default() -> Self {
        DepthDecayConfig {
            n_list: vec![1, 2, 4, 8, 16, 32, 64, 128],
            f1: 8,
            signal_len: 4096,
            j: 7,
            max_depth: 8,
            threshold: 1e-8,
        }
    }
}

impl DepthDecayConfig {
    /// Shannon, Q = 1, with `λ_max` half a bin below `2^(J−1)·f1` so the
    /// band `(λ_j, 2λ_j]` holds exactly the bins `[2^(J−1−j)·f1, 2^(J−j)·f1)`.
    pub fn filterbank_spec(&self) -> FilterbankSpec {
        let top = (1u64 << (self.j - 1)) as f64 * self.f1 as f64;
        let lambda_max = (top - 0.5) / self.signal_len as f64;
        FilterbankSpec::new(WaveletFamily::ComplexShannon, 1, self.j, self.signal_len)
            .with_lambda_max(lambda_max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.j == 0 || self.j > 30 || self.f1 == 0 || self.max_depth == 0 {
            return invalid("J, f1 and max_depth must be positive");
        }
        if self.n_list.is_empty() {
            return invalid("N list is empty");
        }
        self.filterbank_spec().validate()?;
        for &n in &self.n_list {
            HarmonicStackSpec::new(n, self.f1, self.signal_len).validate()?;
        }
        Ok(())
    }
}

/// `max(1, ⌈log2 N⌉)`.
pub fn depth_bound(n: u32) -> usize {
    if n <= 1 {
        1
    } else {
        (32 - (n - 1).leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthCurve {
    pub n: u32,
    /// `energy(U_m)` for `m = 1…max_depth`; zero past natural termination.
    pub energy: Vec<f64>,
    /// `energy(U_m) / energy(U_1)`.
    pub relative: Vec<f64>,
    /// Last `m` whose relative energy exceeds the threshold.
    pub effective_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthDecayResult {
    pub config: DepthDecayConfig,
    pub curves: Vec<DepthCurve>,
}

fn layer_energies(fb: &Filterbank, n: u32, f1: u32, max_depth: usize) -> Result<Vec<f64>> {
    let y = harmonic_stack(&HarmonicStackSpec::new(n, f1, fb.signal_len()))?;
    let opts = ScatteringOptions {
        energy_floor: 0.0,
        ..ScatteringOptions::new(max_depth)
    };
    let (_, layers) = scatter_with(&y, fb, &opts)?;
    let mut e: Vec<f64> = layers.iter().map(layer_energy).collect();
    e.resize(max_depth, 0.0);
    Ok(e)
}

fn curve(fb: &Filterbank, cfg: &DepthDecayConfig, n: u32) -> Result<DepthCurve> {
    let energy = layer_energies(fb, n, cfg.f1, cfg.max_depth)?;
    let e1 = energy[0];
    let relative: Vec<f64> = energy
        .iter()
        .map(|&e| if e1 > 0.0 { e / e1 } else { 0.0 })
        .collect();
    let effective_depth = relative
        .iter()
        .rposition(|&r| r > cfg.threshold)
        .map_or(0, |i| i + 1);
    Ok(DepthCurve {
        n,
        energy,
        relative,
        effective_depth,
    })
}

pub fn run_depth_decay(config: &DepthDecayConfig) -> Result<DepthDecayResult> {
    config.validate()?;
    let fb = build_filterbank(&config.filterbank_spec())?;
    let curves = config
        .n_list
        .par_iter()
        .map(|&n| curve(&fb, config, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(DepthDecayResult {
        config: config.clone(),
        curves,
    })
}

fn decay_svg(curves: &[DepthCurve], title: &str) -> String {
    let points: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|c| c.relative.iter().enumerate().map(|(i, &r)| ((i + 1) as f64, r)).collect())
        .collect();
    let series: Vec<svg::Series> = curves
        .iter()
        .zip(&points)
        .map(|(c, p)| svg::Series {
            name: format!("N={}", c.n),
            points: p,
        })
        .collect();
    svg::line_plot(&svg::LinePlot {
        title,
        xlabel: "depth m",
        ylabel: "energy(U_m) / energy(U_1)",
        log_y: true,
        y_floor: 1e-20,
        series: &series,
    })
}

impl DepthDecayResult {
    /// Writes `depth_decay.csv` and `depth_decay.svg`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let csv_path = dir.join("depth_decay.csv");
        let header: Vec<String> = ["n", "m", "energy", "relative_energy", "effective_depth"]
            .map(String::from)
            .to_vec();
        let rows: Vec<Vec<String>> = self
            .curves
            .iter()
            .flat_map(|c| {
                c.energy.iter().zip(&c.relative).enumerate().map(move |(i, (e, r))| {
                    vec![
                        c.n.to_string(),
                        (i + 1).to_string(),
                        format_value(*e),
                        format_value(*r),
                        c.effective_depth.to_string(),
                    ]
                })
            })
            .collect();
        write_csv(&csv_path, &header, &rows)?;

        let svg_path = dir.join("depth_decay.svg");
        std::fs::write(&svg_path, decay_svg(&self.curves, "layer energy relative to U1"))?;
        Ok(vec![csv_path, svg_path])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremViolation {
    pub n: u32,
    pub m: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub tolerance: f64,
    pub curves: Vec<DepthCurve>,
    /// Largest relative energy past the bound, per N.
    pub max_beyond_bound: Vec<(u32, f64)>,
    pub violations: Vec<TheoremViolation>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn curve(&self, n: u32) -> Option<&DepthCurve> {
        self.curves.iter().find(|c| c.n == n)
    }

    /// Writes `verify_theorem.csv` and `verify_theorem.svg`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let path = dir.join("verify_theorem.csv");
        let header: Vec<String> = ["n", "bound", "m", "relative_energy", "violation"]
            .map(String::from)
            .to_vec();
        let rows: Vec<Vec<String>> = self
            .curves
            .iter()
            .flat_map(|c| {
                let bound = depth_bound(c.n);
                c.relative.iter().enumerate().map(move |(i, &r)| {
                    let m = i + 1;
                    let bad = m > bound && r > self.tolerance;
                    vec![
                        c.n.to_string(),
                        bound.to_string(),
                        m.to_string(),
                        format_value(r),
                        (bad as u8).to_string(),
                    ]
                })
            })
            .collect();
        write_csv(&path, &header, &rows)?;
        let svg_path = dir.join("verify_theorem.svg");
        let title = format!("depth bound check, tolerance {:e}", self.tolerance);
        std::fs::write(&svg_path, decay_svg(&self.curves, &title))?;
        Ok(vec![path, svg_path])
    }
}

/// Checks `energy(U_m)/energy(U_1) ≤ tolerance` for every `m > max(1, ⌈log2 N⌉)`.
pub fn verify_theorem(n_list: &[u32], tolerance: f64) -> Result<TheoremReport> {
    verify_theorem_with(
        &DepthDecayConfig {
            n_list: n_list.to_vec(),
            ..DepthDecayConfig::default()
        },
        tolerance,
    )
}

pub fn verify_theorem_with(config: &DepthDecayConfig, tolerance: f64) -> Result<TheoremReport> {
    if !(tolerance >= 0.0) {
        return invalid("tolerance must be nonnegative");
    }
    let max_bound = config.n_list.iter().map(|&n| depth_bound(n)).max().unwrap_or(1);
    let config = DepthDecayConfig {
        max_depth: config.max_depth.max(max_bound + 1),
        ..config.clone()
    };
    let result = run_depth_decay(&config)?;
    let mut violations = Vec::new();
    let mut max_beyond_bound = Vec::new();
    for c in &result.curves {
        let bound = depth_bound(c.n);
        let mut worst: f64 = 0.0;
        for (i, &r) in c.relative.iter().enumerate().skip(bound) {
            worst = worst.max(r);
            if r > tolerance {
                violations.push(TheoremViolation {
                    n: c.n,
                    m: i + 1,
                    value: r,
                });
            }
        }
        max_beyond_bound.push((c.n, worst));
    }
    Ok(TheoremReport {
        tolerance,
        curves: result.curves,
        max_beyond_bound,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_values() {
        let got: Vec<usize> = [1, 2, 3, 4, 5, 8, 9, 128].map(depth_bound).to_vec();
        assert_eq!(got, vec![1, 1, 2, 2, 3, 3, 4, 7]);
    }

    #[test]
    fn top_band_holds_expected_bins() {
        let cfg = DepthDecayConfig::default();
        let fb = build_filterbank(&cfg.filterbank_spec()).unwrap();
        let h = fb.filter(0);
        assert_eq!(h[511].norm(), 0.0);
        assert_eq!(h[512].norm(), 1.0);
        assert_eq!(h[1023].norm(), 1.0);
        assert_eq!(h[1024].norm(), 0.0);
        let low = fb.filter(6);
        assert_eq!(low[7].norm(), 0.0);
        assert_eq!(low[8].norm(), 1.0);
        assert_eq!(low[15].norm(), 1.0);
        assert_eq!(low[16].norm(), 0.0);
    }

    #[test]
    fn single_tone_has_depth_one() {
        let r = run_depth_decay(&DepthDecayConfig {
            n_list: vec![1],
            ..DepthDecayConfig::default()
        })
        .unwrap();
        assert_eq!(r.curves[0].effective_depth, 1);
        assert_eq!(r.curves[0].relative[0], 1.0);
    }

    #[test]
    fn oversized_stack_rejected() {
        let cfg = DepthDecayConfig {
            n_list: vec![256],
            ..DepthDecayConfig::default()
        };
        assert!(run_depth_decay(&cfg).is_err());
    }

    #[test]
    fn small_theorem_check_passes() {
        let rep = verify_theorem(&[1, 2, 4], 1e-8).unwrap();
        assert!(rep.passed(), "{:?}", rep.violations);
    }
}
