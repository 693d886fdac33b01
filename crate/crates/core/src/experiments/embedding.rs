//! Isomap embeddings of scattering and MFCC features of the additive tone
//! dataset, scored by rank correlation against the synthesis parameters.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{mfcc, MfccConfig};
use crate::error::{invalid, Result};
use crate::export::{format_value, write_csv};
use crate::filterbank::{build_filterbank, FilterbankSpec, WaveletFamily};
use crate::manifold::{isomap, FeatureMatrix, IsomapResult, RowLabel};
use crate::scattering::scatter;
use crate::stats::{greedy_axis_assignment, spearman};
use crate::svg;
use crate::synthesis::DatasetConfig;

pub const PARAMETER_NAMES: [&str; 3] = ["f1", "alpha", "r"];

/// Column-wise preprocessing applied before Isomap.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureTransform {
    /// `ln(|x| + 1e−12)` per entry.
    pub log: bool,
    /// Per-column z-score.
    pub standardize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub dataset: DatasetConfig,
    pub family: WaveletFamily,
    pub q: u32,
    pub j: u32,
    pub lambda_max: f64,
    pub max_order: usize,
    pub mfcc: MfccConfig,
    pub k: usize,
    pub dim: usize,
    pub transform: FeatureTransform,
    /// Seeds the label permutation of the negative control.
    pub shuffle_seed: u64,
}

impl EmbeddingConfig {
    /// 20 × 20 grid, cycling fundamentals, K = 50.
    pub fn desk() -> Self {
        EmbeddingConfig {
            dataset: DatasetConfig::desk(20),
            family: WaveletFamily::Morlet,
            q: 1,
            j: 8,
            lambda_max: 0.25,
            max_order: 2,
            mfcc: MfccConfig::default(),
            k: 50,
            dim: 3,
            transform: FeatureTransform::default(),
            shuffle_seed: 0,
        }
    }

    /// 2500 tones with random fundamentals, K = 100.
    pub fn full(seed: u64) -> Self {
        EmbeddingConfig {
            dataset: DatasetConfig::full(seed),
            k: 100,
            shuffle_seed: seed,
            ..EmbeddingConfig::desk()
        }
    }

    pub fn filterbank_spec(&self) -> FilterbankSpec {
        FilterbankSpec::new(self.family, self.q, self.j, self.dataset.window_len)
            .with_lambda_max(self.lambda_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSetReport {
    pub name: String,
    pub n_features: usize,
    pub isomap: IsomapResult,
    /// `rho[p][a]`: Spearman ρ of parameter `p` (f1, α, r) with axis `a`.
    pub rho: Vec<Vec<f64>>,
    /// Axis assigned to each parameter.
    pub assignment: Vec<usize>,
    /// Same table with labels permuted.
    pub shuffled_rho: Vec<Vec<f64>>,
}

impl FeatureSetReport {
    /// `|ρ|` of each parameter against its assigned axis.
    pub fn assigned_abs_rho(&self) -> Vec<f64> {
        self.assignment
            .iter()
            .enumerate()
            .map(|(p, &a)| self.rho[p][a].abs())
            .collect()
    }

    /// Largest `|ρ|` of parameter `p` over axes other than `excluded`.
    pub fn best_abs_rho_excluding(&self, p: usize, excluded: usize) -> f64 {
        self.rho[p]
            .iter()
            .enumerate()
            .filter(|(a, _)| *a != excluded)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_shuffled_abs_rho(&self) -> f64 {
        self.shuffled_rho.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub config: EmbeddingConfig,
    pub labels: Vec<RowLabel>,
    pub scattering: FeatureSetReport,
    pub mfcc: FeatureSetReport,
}

fn transform(rows: Vec<Vec<f64>>, t: FeatureTransform) -> Result<FeatureMatrix> {
    let rows = if t.log {
        rows.into_iter()
            .map(|r| r.into_iter().map(|v| (v.abs() + 1e-12).ln()).collect())
            .collect()
    } else {
        rows
    };
    let m = FeatureMatrix::from_rows(rows)?;
    Ok(if t.standardize { m.standardized() } else { m })
}

fn label_columns(labels: &[RowLabel]) -> [Vec<f64>; 3] {
    [
        labels.iter().map(|l| l.f1).collect(),
        labels.iter().map(|l| l.alpha).collect(),
        labels.iter().map(|l| l.r).collect(),
    ]
}

fn correlation_table(params: &[Vec<f64>; 3], iso: &IsomapResult) -> Result<Vec<Vec<f64>>> {
    let e = &iso.embedding;
    params
        .iter()
        .map(|p| {
            let kept: Vec<f64> = iso.kept.iter().map(|&i| p[i]).collect();
            (0..e.dim).map(|a| spearman(&kept, &e.axis(a))).collect()
        })
        .collect()
}

/// Isomap plus correlation analysis of one feature set.
pub fn analyze_features(
    name: &str,
    x: &FeatureMatrix,
    k: usize,
    dim: usize,
    shuffle_seed: u64,
) -> Result<FeatureSetReport> {
    if dim < 3 {
        return invalid("embedding needs at least 3 dimensions for three parameters");
    }
    if x.labels().len() != x.rows() {
        return invalid("feature matrix carries no row labels");
    }
    let iso = isomap(x, k, dim)?;
    let params = label_columns(x.labels());
    let rho = correlation_table(&params, &iso)?;
    let assignment = greedy_axis_assignment(&rho)?;

    let mut perm: Vec<usize> = (0..x.rows()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
    let shuffled: [Vec<f64>; 3] = params.map(|p| perm.iter().map(|&i| p[i]).collect());
    let shuffled_rho = correlation_table(&shuffled, &iso)?;

    Ok(FeatureSetReport {
        name: name.to_string(),
        n_features: x.cols(),
        isomap: iso,
        rho,
        assignment,
        shuffled_rho,
    })
}

pub fn run_embedding_experiment(config: &EmbeddingConfig) -> Result<EmbeddingReport> {
    let data = config.dataset.generate()?;
    let fb = build_filterbank(&config.filterbank_spec())?;
    let labels: Vec<RowLabel> = data
        .iter()
        .map(|(s, _)| RowLabel {
            f1: s.f1 as f64,
            alpha: s.alpha,
            r: s.r,
        })
        .collect();
    let scat_rows = data
        .par_iter()
        .map(|(_, y)| scatter(y, &fb, config.max_order).map(|(f, _)| f.to_vector()))
        .collect::<Result<Vec<_>>>()?;
    let mfcc_rows = data
        .par_iter()
        .map(|(_, y)| mfcc(y, &config.mfcc))
        .collect::<Result<Vec<_>>>()?;

    let xs = transform(scat_rows, config.transform)?.with_labels(labels.clone())?;
    let xm = transform(mfcc_rows, config.transform)?.with_labels(labels.clone())?;
    let scattering = analyze_features("scattering", &xs, config.k, config.dim, config.shuffle_seed)?;
    let mfcc = analyze_features("mfcc", &xm, config.k, config.dim, config.shuffle_seed)?;
    Ok(EmbeddingReport {
        config: config.clone(),
        labels,
        scattering,
        mfcc,
    })
}

impl EmbeddingReport {
    /// Per feature set: coordinates, eigenvalues, correlation CSVs and a
    /// scatter SVG.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for rep in [&self.scattering, &self.mfcc] {
            out.extend(self.write_set(dir, rep)?);
        }
        let corr = dir.join("embedding_correlations.csv");
        let header: Vec<String> = ["features", "parameter", "axis", "spearman", "shuffled_spearman", "assigned"]
            .map(String::from)
            .to_vec();
        let mut rows = Vec::new();
        for rep in [&self.scattering, &self.mfcc] {
            for (p, name) in PARAMETER_NAMES.iter().enumerate() {
                for a in 0..rep.rho[p].len() {
                    rows.push(vec![
                        rep.name.clone(),
                        name.to_string(),
                        a.to_string(),
                        format_value(rep.rho[p][a]),
                        format_value(rep.shuffled_rho[p][a]),
                        ((rep.assignment[p] == a) as u8).to_string(),
                    ]);
                }
            }
        }
        write_csv(&corr, &header, &rows)?;
        out.push(corr);
        Ok(out)
    }

    fn write_set(&self, dir: &Path, rep: &FeatureSetReport) -> Result<Vec<PathBuf>> {
        let e = &rep.isomap.embedding;
        let coords = dir.join(format!("embedding_{}.csv", rep.name));
        let header: Vec<String> = ["row_id", "x", "y", "z", "f1", "alpha", "r", "component_flag"]
            .map(String::from)
            .to_vec();
        let mut pos = vec![None; self.labels.len()];
        for (row, &i) in rep.isomap.kept.iter().enumerate() {
            pos[i] = Some(row);
        }
        let rows: Vec<Vec<String>> = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let xyz: Vec<String> = match pos[i] {
                    Some(row) => (0..3).map(|a| format_value(e.point(row)[a])).collect(),
                    None => vec![String::new(); 3],
                };
                let mut r = vec![i.to_string()];
                r.extend(xyz);
                r.extend([format_value(l.f1), format_value(l.alpha), format_value(l.r)]);
                r.push((pos[i].is_some() as u8).to_string());
                r
            })
            .collect();
        write_csv(&coords, &header, &rows)?;

        let eig = dir.join(format!("eigenvalues_{}.csv", rep.name));
        let rows: Vec<Vec<String>> = e
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), format_value(*v)])
            .collect();
        write_csv(&eig, &["index".to_string(), "eigenvalue".to_string()], &rows)?;

        let kept_labels: Vec<RowLabel> = rep.isomap.kept.iter().map(|&i| self.labels[i]).collect();
        let params = label_columns(&kept_labels);
        let axes: Vec<Vec<f64>> = (0..3).map(|a| e.axis(a)).collect();
        let panels: Vec<svg::ScatterPanel> = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .zip(0..3)
            .map(|(&(ax, ay), p)| svg::ScatterPanel {
                title: format!("color: {}", PARAMETER_NAMES[p]),
                xlabel: format!("axis {ax}"),
                ylabel: format!("axis {ay}"),
                x: &axes[ax],
                y: &axes[ay],
                color_by: &params[p],
            })
            .collect();
        let svg_path = dir.join(format!("embedding_{}.svg", rep.name));
        std::fs::write(
            &svg_path,
            svg::scatter_panels(&format!("Isomap of {} features", rep.name), &panels),
        )?;
        Ok(vec![coords, eig, svg_path])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_run_produces_valid_tables() {
        let cfg = EmbeddingConfig {
            dataset: DatasetConfig::desk(5),
            k: 8,
            ..EmbeddingConfig::desk()
        };
        let rep = run_embedding_experiment(&cfg).unwrap();
        assert_eq!(rep.labels.len(), 25);
        assert_eq!(rep.scattering.n_features, 37);
        assert_eq!(rep.mfcc.n_features, 12);
        for set in [&rep.scattering, &rep.mfcc] {
            assert!(set.rho.iter().flatten().all(|v| (-1.0..=1.0).contains(v)));
            let mut axes = set.assignment.clone();
            axes.sort();
            axes.dedup();
            assert_eq!(axes.len(), 3);
        }
    }

    #[test]
    fn log_transform_is_finite_on_zero() {
        let m = transform(
            vec![vec![0.0, 1.0], vec![-1.0, 2.0]],
            FeatureTransform {
                log: true,
                standardize: true,
            },
        )
        .unwrap();
        assert!((0..2).all(|i| m.row(i).iter().all(|v| v.is_finite())));
    }
}
