//! Test-signal generators: two-tone mixtures, windowed additive tones,
//! exact-bin harmonic stacks, and the (α, r) tone dataset.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoToneSpec {
    pub a1: f64,
    pub a2: f64,
    /// cycles/sample
    pub nu1: f64,
    pub nu2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub signal_len: usize,
}

impl TwoToneSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, nu) in [("nu1", self.nu1), ("nu2", self.nu2)] {
            if !(nu > 0.0 && nu < 0.5) {
                return invalid(format!("{name} must lie in (0, 0.5) cycles/sample, got {nu}"));
            }
        }
        if self.a1 < 0.0 || self.a2 < 0.0 || !self.a1.is_finite() || !self.a2.is_finite() {
            return invalid("amplitudes must be finite and nonnegative");
        }
        if self.signal_len == 0 {
            return invalid("signal_len must be positive");
        }
        Ok(())
    }
}

/// `a1·cos(2πν1t + φ1) + a2·cos(2πν2t + φ2)` for `t = 0…signal_len−1`.
pub fn two_tone(spec: &TwoToneSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok((0..spec.signal_len)
        .map(|t| {
            let t = t as f64;
            spec.a1 * (2.0 * PI * spec.nu1 * t + spec.phi1).cos()
                + spec.a2 * (2.0 * PI * spec.nu2 * t + spec.phi2).cos()
        })
        .collect())
}

/// Periodic Hann window value at sample `t` of a length-`len` frame.
pub fn hann(t: usize, len: usize) -> f64 {
    0.5 - 0.5 * (2.0 * PI * t as f64 / len as f64).cos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveToneSpec {
    /// Fourier decay exponent.
    pub alpha: f64,
    /// Relative odd-to-even amplitude difference.
    pub r: f64,
    /// Fundamental in cycles per window.
    pub f1: u32,
    /// Harmonic count.
    pub n_harmonics: u32,
    /// Window length `T` in samples.
    pub window_len: usize,
}

impl AdditiveToneSpec {
    pub const DEFAULT_HARMONICS: u32 = 32;
    pub const DEFAULT_WINDOW: usize = 1024;

    pub fn new(alpha: f64, r: f64, f1: u32) -> Self {
        AdditiveToneSpec {
            alpha,
            r,
            f1,
            n_harmonics: Self::DEFAULT_HARMONICS,
            window_len: Self::DEFAULT_WINDOW,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return invalid(format!("alpha must be finite and >= 0, got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.r) {
            return invalid(format!("r must lie in [0, 1], got {}", self.r));
        }
        if self.n_harmonics == 0 || self.f1 == 0 {
            return invalid("f1 and the harmonic count must be positive");
        }
        if 2 * self.f1 as usize >= self.window_len {
            return invalid(format!(
                "fundamental f1 = {} cycles is at or above Nyquist for T = {}",
                self.f1, self.window_len
            ));
        }
        Ok(())
    }

    /// Amplitude `(1 + (−1)^n r) / n^α` of harmonic `n`.
    pub fn harmonic_amplitude(&self, n: u32) -> f64 {
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        (1.0 + sign * self.r) / (n as f64).powf(self.alpha)
    }

    /// Harmonics kept below Nyquist; the rest are dropped rather than aliased.
    pub fn audible_harmonics(&self) -> impl Iterator<Item = u32> + '_ {
        (1..=self.n_harmonics).filter(move |&n| 2 * (n as usize) * (self.f1 as usize) < self.window_len)
    }
}

/// Hann-windowed harmonic tone with amplitudes `(1 + (−1)^n r) / n^α`.
pub fn additive_tone(spec: &AdditiveToneSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let len = spec.window_len;
    let harmonics: Vec<(f64, f64)> = spec
        .audible_harmonics()
        .map(|n| {
            (
                spec.harmonic_amplitude(n),
                2.0 * PI * (n as f64) * spec.f1 as f64 / len as f64,
            )
        })
        .collect();
    Ok((0..len)
        .map(|t| {
            let s: f64 = harmonics
                .iter()
                .map(|(a, w)| a * (w * t as f64).cos())
                .sum();
            s * hann(t, len)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicStackSpec {
    pub n_components: u32,
    pub a1: f64,
    pub phi1: f64,
    /// Fundamental in cycles per frame (a DFT bin index).
    pub f1: u32,
    pub signal_len: usize,
}

impl HarmonicStackSpec {
    pub fn new(n_components: u32, f1: u32, signal_len: usize) -> Self {
        HarmonicStackSpec {
            n_components,
            a1: 1.0,
            phi1: 0.0,
            f1,
            signal_len,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_components == 0 || self.f1 == 0 {
            return invalid("component count and f1 must be positive");
        }
        if 2 * (self.n_components as usize) * (self.f1 as usize) >= self.signal_len {
            return invalid(format!(
                "N·f1 = {} must stay below signal_len/2 = {}",
                self.n_components as usize * self.f1 as usize,
                self.signal_len / 2
            ));
        }
        Ok(())
    }

    /// Bandwidth in octaves, `log2 N`.
    pub fn bandwidth_octaves(&self) -> f64 {
        (self.n_components as f64).log2()
    }
}

/// `Σ_{n=1}^{N} a1·cos(2π·n·f1·t/L + φ1)`, unwindowed, periodic on the frame.
pub fn harmonic_stack(spec: &HarmonicStackSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let len = spec.signal_len;
    Ok((0..len)
        .map(|t| {
            (1..=spec.n_components)
                .map(|n| {
                    // reduce the phase index modulo L so large t·n stays exact
                    let k = (n as usize * spec.f1 as usize * t) % len;
                    spec.a1 * (2.0 * PI * k as f64 / len as f64 + spec.phi1).cos()
                })
                .sum()
        })
        .collect())
}

/// How the fundamental of each dataset tone is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum F1Schedule {
    /// Uniform integer in `f1_min..=f1_max` from a seeded ChaCha8 generator.
    Random { seed: u64 },
    /// `f1_min, f1_min+1, …, f1_max, f1_min, …` in grid order.
    Cycle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub alpha_steps: usize,
    pub r_steps: usize,
    pub alpha_range: (f64, f64),
    pub r_range: (f64, f64),
    pub f1_min: u32,
    pub f1_max: u32,
    pub schedule: F1Schedule,
    pub n_harmonics: u32,
    pub window_len: usize,
}

impl DatasetConfig {
    /// 50 × 50 (α, r) grid with random fundamentals in 12…24.
    pub fn full(seed: u64) -> Self {
        DatasetConfig {
            alpha_steps: 50,
            r_steps: 50,
            alpha_range: (0.0, 2.0),
            r_range: (0.0, 1.0),
            f1_min: 12,
            f1_max: 24,
            schedule: F1Schedule::Random { seed },
            n_harmonics: AdditiveToneSpec::DEFAULT_HARMONICS,
            window_len: AdditiveToneSpec::DEFAULT_WINDOW,
        }
    }

    /// Reduced grid with the fundamental cycling through 12…24.
    pub fn desk(steps: usize) -> Self {
        DatasetConfig {
            alpha_steps: steps,
            r_steps: steps,
            schedule: F1Schedule::Cycle,
            ..DatasetConfig::full(0)
        }
    }

    pub fn len(&self) -> usize {
        self.alpha_steps * self.r_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Tone parameters in grid order (α outer, r inner).
    pub fn specs(&self) -> Result<Vec<AdditiveToneSpec>> {
        if self.alpha_steps == 0 || self.r_steps == 0 {
            return invalid("dataset grid must have at least one step per axis");
        }
        if self.f1_min == 0 || self.f1_min > self.f1_max {
            return invalid("f1 range must be nonempty and positive");
        }
        let alphas = linspace(self.alpha_range.0, self.alpha_range.1, self.alpha_steps);
        let rs = linspace(self.r_range.0, self.r_range.1, self.r_steps);
        let mut rng = match self.schedule {
            F1Schedule::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            F1Schedule::Cycle => None,
        };
        let span = self.f1_max - self.f1_min + 1;
        let mut specs = Vec::with_capacity(self.len());
        for &alpha in &alphas {
            for &r in &rs {
                let f1 = match rng.as_mut() {
                    Some(rng) => rng.random_range(self.f1_min..=self.f1_max),
                    None => self.f1_min + (specs.len() as u32 % span),
                };
                let spec = AdditiveToneSpec {
                    alpha,
                    r,
                    f1,
                    n_harmonics: self.n_harmonics,
                    window_len: self.window_len,
                };
                spec.validate()?;
                specs.push(spec);
            }
        }
        Ok(specs)
    }

    pub fn generate(&self) -> Result<Vec<(AdditiveToneSpec, Vec<f64>)>> {
        let specs = self.specs()?;
        specs
            .into_par_iter()
            .map(|s| {
                let y = additive_tone(&s)?;
                Ok((s, y))
            })
            .collect()
    }
}

/// Full 2500-tone dataset for `seed`.
pub fn dataset_generate(seed: u64) -> Result<Vec<(AdditiveToneSpec, Vec<f64>)>> {
    DatasetConfig::full(seed).generate()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_tone_degenerate_is_pure_cosine() {
        let spec = TwoToneSpec {
            a1: 1.5,
            a2: 0.0,
            nu1: 0.1,
            nu2: 0.2,
            phi1: 0.3,
            phi2: 0.0,
            signal_len: 64,
        };
        let y = two_tone(&spec).unwrap();
        for (t, v) in y.iter().enumerate() {
            assert!((v - 1.5 * (2.0 * PI * 0.1 * t as f64 + 0.3).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn two_tone_is_a_beating_tone() {
        let (nu1, nu2) = (0.11, 0.13);
        let spec = TwoToneSpec {
            a1: 1.0,
            a2: 1.0,
            nu1,
            nu2,
            phi1: 0.0,
            phi2: 0.0,
            signal_len: 200,
        };
        let y = two_tone(&spec).unwrap();
        for (t, v) in y.iter().enumerate() {
            let t = t as f64;
            let carrier = (2.0 * PI * 0.5 * (nu1 + nu2) * t).cos();
            let envelope = (2.0 * PI * 0.5 * (nu2 - nu1) * t).cos();
            assert!((v - 2.0 * carrier * envelope).abs() < 1e-12);
        }
    }

    #[test]
    fn two_tone_rejects_nyquist() {
        let mut spec = TwoToneSpec {
            a1: 1.0,
            a2: 1.0,
            nu1: 0.5,
            nu2: 0.1,
            phi1: 0.0,
            phi2: 0.0,
            signal_len: 16,
        };
        assert!(two_tone(&spec).is_err());
        spec.nu1 = 0.2;
        spec.a2 = -1.0;
        assert!(two_tone(&spec).is_err());
    }

    #[test]
    fn additive_amplitudes() {
        let s = AdditiveToneSpec::new(1.5, 1.0, 12);
        for n in 1..=32 {
            let a = s.harmonic_amplitude(n);
            if n % 2 == 1 {
                assert_eq!(a, 0.0);
            } else {
                assert!((a - 2.0 / (n as f64).powf(1.5)).abs() < 1e-15);
            }
        }
        let flat = AdditiveToneSpec::new(0.0, 0.0, 12);
        assert!((1..=32).all(|n| flat.harmonic_amplitude(n) == 1.0));
    }

    #[test]
    fn additive_drops_harmonics_above_nyquist() {
        let s = AdditiveToneSpec::new(0.0, 0.0, 24);
        assert_eq!(s.audible_harmonics().count(), 21);
        assert_eq!(additive_tone(&s).unwrap().len(), 1024);
        assert!(additive_tone(&AdditiveToneSpec::new(0.0, 0.0, 512)).is_err());
        assert!(additive_tone(&AdditiveToneSpec::new(-1.0, 0.0, 12)).is_err());
        assert!(additive_tone(&AdditiveToneSpec::new(1.0, 1.5, 12)).is_err());
    }

    #[test]
    fn stack_validation() {
        assert!(harmonic_stack(&HarmonicStackSpec::new(8, 4, 64)).is_err());
        let y = harmonic_stack(&HarmonicStackSpec::new(1, 3, 64)).unwrap();
        for (t, v) in y.iter().enumerate() {
            assert!((v - (2.0 * PI * 3.0 * t as f64 / 64.0).cos()).abs() < 1e-12);
        }
        assert_eq!(HarmonicStackSpec::new(8, 1, 64).bandwidth_octaves(), 3.0);
    }

    #[test]
    fn dataset_shape_and_range() {
        let specs = DatasetConfig::full(42).specs().unwrap();
        assert_eq!(specs.len(), 2500);
        assert!(specs.iter().all(|s| (12..=24).contains(&s.f1)));
        assert_eq!(specs[0].alpha, 0.0);
        assert_eq!(specs[2499].alpha, 2.0);
        assert_eq!(specs[49].r, 1.0);
        // every fundamental shows up
        for f in 12..=24 {
            assert!(specs.iter().any(|s| s.f1 == f));
        }
        let again = DatasetConfig::full(42).specs().unwrap();
        assert_eq!(specs, again);
        let other = DatasetConfig::full(43).specs().unwrap();
        assert_ne!(specs, other);
    }

    #[test]
    fn desk_schedule_cycles() {
        let specs = DatasetConfig::desk(4).specs().unwrap();
        let f: Vec<u32> = specs.iter().map(|s| s.f1).collect();
        assert_eq!(&f[..4], &[12, 13, 14, 15]);
        assert_eq!(specs.len(), 16);
    }

    #[test]
    fn spacing_helpers() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let l = logspace(1e-3, 1.0, 4);
        assert!((l[1] - 1e-2).abs() < 1e-15 && (l[3] - 1.0).abs() < 1e-15);
    }
}
