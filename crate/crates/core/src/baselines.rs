//! Single-frame MFCC baseline: power spectrum, triangular mel filterbank,
//! log compression, orthonormal DCT-II.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfccConfig {
    pub n_mels: usize,
    pub n_mfcc: usize,
    /// cycles/sample
    pub fmin: f64,
    /// cycles/sample
    pub fmax: f64,
    /// Nominal rate used only to place filters on the mel scale.
    pub sample_rate: f64,
    /// Floor applied before the logarithm.
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig {
            n_mels: 40,
            n_mfcc: 12,
            fmin: 0.0,
            fmax: 0.5,
            sample_rate: 22050.0,
            log_floor: 1e-10,
        }
    }
}

impl MfccConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_mels == 0 || self.n_mfcc == 0 || self.n_mfcc > self.n_mels {
            return invalid(format!(
                "need 1 <= n_mfcc <= n_mels, got n_mfcc = {}, n_mels = {}",
                self.n_mfcc, self.n_mels
            ));
        }
        if !(0.0 <= self.fmin && self.fmin < self.fmax && self.fmax <= 0.5) {
            return invalid("mel range must satisfy 0 <= fmin < fmax <= 0.5 cycles/sample");
        }
        if !(self.sample_rate > 0.0) || !(self.log_floor > 0.0) {
            return invalid("sample rate and log floor must be positive");
        }
        Ok(())
    }
}

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// `n_mels × n_fft_bins` row-major weights; each row sums to 1.
///
/// Bin `k` of `n_fft_bins` sits at `k / (2·(n_fft_bins − 1))` cycles/sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    pub n_mels: usize,
    pub n_bins: usize,
    pub weights: Vec<f64>,
    /// Center of each filter in Hz, increasing.
    pub centers_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn row(&self, m: usize) -> &[f64] {
        &self.weights[m * self.n_bins..(m + 1) * self.n_bins]
    }
}

pub fn mel_filterbank(cfg: &MfccConfig, n_fft_bins: usize) -> Result<MelFilterbank> {
    cfg.validate()?;
    if n_fft_bins < 2 {
        return invalid("need at least two spectrum bins");
    }
    let sr = cfg.sample_rate;
    let bin_hz = sr / (2.0 * (n_fft_bins - 1) as f64);
    let (lo, hi) = (hz_to_mel(cfg.fmin * sr), hz_to_mel(cfg.fmax * sr));
    let edges: Vec<f64> = (0..cfg.n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (cfg.n_mels + 1) as f64))
        .collect();

    let center_bins: Vec<i64> = edges[1..=cfg.n_mels]
        .iter()
        .map(|c| (c / bin_hz).round() as i64)
        .collect();
    if let Some(w) = center_bins.windows(2).position(|w| w[0] == w[1]) {
        return invalid(format!(
            "mel filters {w} and {} share center bin {}; use fewer mels or a longer frame",
            w + 1,
            center_bins[w]
        ));
    }

    let mut weights = vec![0.0; cfg.n_mels * n_fft_bins];
    for m in 0..cfg.n_mels {
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        let row = &mut weights[m * n_fft_bins..(m + 1) * n_fft_bins];
        for (k, w) in row.iter_mut().enumerate() {
            let f = k as f64 * bin_hz;
            let rise = (f - left) / (center - left);
            let fall = (right - f) / (right - center);
            *w = rise.min(fall).max(0.0);
        }
        let area: f64 = row.iter().sum();
        if area <= 0.0 {
            return invalid(format!("mel filter {m} covers no spectrum bin"));
        }
        row.iter_mut().for_each(|w| *w /= area);
    }
    Ok(MelFilterbank {
        n_mels: cfg.n_mels,
        n_bins: n_fft_bins,
        weights,
        centers_hz: edges[1..=cfg.n_mels].to_vec(),
    })
}

/// Orthonormal type-II DCT.
pub fn dct2_orthonormal(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            scale
                * x.iter()
                    .enumerate()
                    .map(|(i, v)| v * (PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// One-sided power spectrum `|X_k|²`, `k = 0…len/2`.
pub fn power_spectrum(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    let mut buf: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..n / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
}

/// Log mel energies of the whole signal as one frame.
pub fn log_mel_energies(signal: &[f64], cfg: &MfccConfig) -> Result<Vec<f64>> {
    if signal.len() < 2 {
        return invalid("signal must have at least two samples");
    }
    let power = power_spectrum(signal);
    let fb = mel_filterbank(cfg, power.len())?;
    Ok((0..fb.n_mels)
        .map(|m| {
            let e: f64 = fb.row(m).iter().zip(&power).map(|(w, p)| w * p).sum();
            e.max(cfg.log_floor).ln()
        })
        .collect())
}

/// First `n_mfcc` cepstral coefficients of the whole signal.
pub fn mfcc(signal: &[f64], cfg: &MfccConfig) -> Result<Vec<f64>> {
    let log_mel = log_mel_energies(signal, cfg)?;
    let mut c = dct2_orthonormal(&log_mel);
    c.truncate(cfg.n_mfcc);
    Ok(c)
}
