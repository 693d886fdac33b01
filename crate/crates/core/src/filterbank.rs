//! Constant-Q analytic wavelet filterbanks sampled on the DFT grid.
//!
//! Every filter is evaluated directly in the frequency domain: the `j`-th
//! wavelet has transfer function `ψ̂(ν / λ_j)` where `ν` is the frequency of a
//! DFT bin in cycles per sample. Negative frequencies are always zero, so
//! filtering a real signal keeps only its analytic part.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Shape of the mother wavelet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveletFamily {
    /// Gaussian bump with a DC-cancelling correction term.
    Morlet,
    /// Order-4 all-pole response; asymmetric around its peak.
    Gammatone,
    /// Indicator of the band `(1, 2^(1/Q)]`; one full octave at `Q = 1`.
    ComplexShannon,
}

impl WaveletFamily {
    pub const ALL: [WaveletFamily; 3] = [
        WaveletFamily::Morlet,
        WaveletFamily::Gammatone,
        WaveletFamily::ComplexShannon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WaveletFamily::Morlet => "morlet",
            WaveletFamily::Gammatone => "gammatone",
            WaveletFamily::ComplexShannon => "shannon",
        }
    }

    /// Normalized frequency at which the transfer function reaches its
    /// nominal peak. For Morlet and Gammatone this is 1; the Shannon
    /// indicator is flat, so the midpoint of its support is used.
    pub fn center_omega(self, q: u32) -> f64 {
        match self {
            WaveletFamily::Morlet | WaveletFamily::Gammatone => 1.0,
            WaveletFamily::ComplexShannon => 0.5 * (1.0 + shannon_upper_edge(q)),
        }
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveletFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "morlet" => Ok(WaveletFamily::Morlet),
            "gammatone" => Ok(WaveletFamily::Gammatone),
            "shannon" | "complex_shannon" | "complex-shannon" | "complexshannon" => {
                Ok(WaveletFamily::ComplexShannon)
            }
            other => invalid(format!("unknown wavelet family `{other}`")),
        }
    }
}

fn shannon_upper_edge(q: u32) -> f64 {
    2f64.powf(1.0 / q.max(1) as f64)
}

/// A mother wavelet with its shape parameter calibrated so that the
/// equivalent rectangular bandwidth of `|ψ̂|` equals `1/Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotherWavelet {
    family: WaveletFamily,
    q: u32,
    /// Morlet: Gaussian width σ. Gammatone: bandwidth factor B. Shannon: upper band edge.
    shape: f64,
    /// Morlet only: weight of the DC-cancelling Gaussian.
    kappa: f64,
}

const ERB_INTERVALS: usize = 20_000;

impl MotherWavelet {
    pub fn new(family: WaveletFamily, q: u32) -> Result<Self> {
        if q == 0 {
            return invalid("quality factor Q must be at least 1");
        }
        let mut w = MotherWavelet {
            family,
            q,
            shape: 0.0,
            kappa: 0.0,
        };
        match family {
            WaveletFamily::ComplexShannon => w.shape = shannon_upper_edge(q),
            WaveletFamily::Gammatone => {
                // Closed form on the full real line; refined below for the ω > 0 truncation.
                let b0 = 5.0 * PI * q as f64 / 16.0;
                w.shape = calibrate(b0 / 4.0, b0 * 4.0, false, 1.0 / q as f64, |b| {
                    let probe = MotherWavelet { shape: b, ..w };
                    probe.erb()
                })?;
            }
            WaveletFamily::Morlet => {
                let s0 = 1.0 / (q as f64 * PI.sqrt());
                let sigma = calibrate(s0 / 4.0, s0 * 4.0, true, 1.0 / q as f64, |s| {
                    MotherWavelet::morlet(q, s).erb()
                })?;
                w = MotherWavelet::morlet(q, sigma);
            }
        }
        Ok(w)
    }

    fn morlet(q: u32, sigma: f64) -> Self {
        MotherWavelet {
            family: WaveletFamily::Morlet,
            q,
            shape: sigma,
            kappa: (-1.0 / (2.0 * sigma * sigma)).exp(),
        }
    }

    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Calibrated shape parameter (σ for Morlet, B for Gammatone, band edge for Shannon).
    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// Transfer function at normalized frequency `omega` (unit center frequency).
    pub fn eval(&self, omega: f64) -> Complex64 {
        if !(omega > 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        match self.family {
            WaveletFamily::ComplexShannon => {
                if omega > 1.0 && omega <= self.shape {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            WaveletFamily::Gammatone => {
                let z = Complex64::new(1.0, self.shape * (omega - 1.0));
                z.powi(-4)
            }
            WaveletFamily::Morlet => {
                let two_s2 = 2.0 * self.shape * self.shape;
                let d = omega - 1.0;
                let v = (-d * d / two_s2).exp() - self.kappa * (-omega * omega / two_s2).exp();
                // normalized to exactly 1 at ω = 1
                Complex64::new(v / (1.0 - self.kappa * self.kappa), 0.0)
            }
        }
    }

    /// Equivalent rectangular bandwidth `∫|ψ̂|² / max|ψ̂|²` over ω > 0.
    pub fn erb(&self) -> f64 {
        let hi = match self.family {
            WaveletFamily::ComplexShannon => return self.shape - 1.0,
            WaveletFamily::Gammatone => 1.0 + 200.0 / self.shape,
            WaveletFamily::Morlet => 1.0 + 40.0 * self.shape,
        };
        let h = hi / ERB_INTERVALS as f64;
        let mut acc = 0.0;
        let mut peak = 0.0f64;
        for i in 0..=ERB_INTERVALS {
            let p = self.eval(i as f64 * h).norm_sqr();
            peak = peak.max(p);
            let weight = if i == 0 || i == ERB_INTERVALS {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += weight * p;
        }
        acc * h / 3.0 / peak
    }
}

/// Bisection for `erb(x) = target`; `increasing` gives the monotonicity of erb in x.
fn calibrate(
    mut lo: f64,
    mut hi: f64,
    increasing: bool,
    target: f64,
    erb: impl Fn(f64) -> f64,
) -> Result<f64> {
    let (e_lo, e_hi) = (erb(lo), erb(hi));
    let bracketed = if increasing {
        e_lo <= target && target <= e_hi
    } else {
        e_hi <= target && target <= e_lo
    };
    if !bracketed {
        return Err(Error::Numerical(format!(
            "ERB calibration not bracketed: erb({lo})={e_lo}, erb({hi})={e_hi}, target {target}"
        )));
    }
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        let too_wide = erb(mid) > target;
        if too_wide == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `ψ̂(ω)` of the calibrated mother wavelet. Calibrates on every call; build a
/// [`MotherWavelet`] once when evaluating many points.
pub fn evaluate_wavelet_hat(family: WaveletFamily, q: u32, omega: f64) -> Result<Complex64> {
    Ok(MotherWavelet::new(family, q)?.eval(omega))
}

/// `Q·J` center frequencies `λ_j = lambda_max · 2^(−j/Q)`, strictly decreasing.
pub fn build_frequency_grid(lambda_max: f64, q: u32, j: u32) -> Result<Vec<f64>> {
    if !(lambda_max > 0.0 && lambda_max <= 0.5) {
        return invalid(format!(
            "lambda_max must lie in (0, 0.5] cycles/sample, got {lambda_max}"
        ));
    }
    let count = q as usize * j as usize;
    if count == 0 {
        return invalid("Q·J must be positive");
    }
    Ok((0..count)
        .map(|i| lambda_max * 2f64.powf(-(i as f64) / q as f64))
        .collect())
}

/// Frequency of DFT bin `k` of an `n`-point transform in cycles per sample.
/// The Nyquist bin maps to `+0.5`.
pub fn bin_frequency(k: usize, n: usize) -> f64 {
    if 2 * k <= n {
        k as f64 / n as f64
    } else {
        k as f64 / n as f64 - 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterbankSpec {
    pub family: WaveletFamily,
    /// Quality factor; also the number of wavelets per octave.
    pub q: u32,
    /// Number of octaves covered.
    pub j: u32,
    /// Highest center frequency, cycles/sample.
    pub lambda_max: f64,
    /// Duration `T` of the Hann low-pass window, samples.
    pub averaging_scale: usize,
    pub signal_len: usize,
}

impl FilterbankSpec {
    pub const DEFAULT_LAMBDA_MAX: f64 = 0.25;

    /// Spec with `lambda_max = 0.25` and `T = signal_len`.
    pub fn new(family: WaveletFamily, q: u32, j: u32, signal_len: usize) -> Self {
        FilterbankSpec {
            family,
            q,
            j,
            lambda_max: Self::DEFAULT_LAMBDA_MAX,
            averaging_scale: signal_len,
            signal_len,
        }
    }

    pub fn with_lambda_max(mut self, lambda_max: f64) -> Self {
        self.lambda_max = lambda_max;
        self
    }

    pub fn with_averaging_scale(mut self, t: usize) -> Self {
        self.averaging_scale = t;
        self
    }

    pub fn num_filters(&self) -> usize {
        self.q as usize * self.j as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 || self.j == 0 {
            return invalid("Q and J must both be at least 1");
        }
        if !(self.lambda_max > 0.0 && self.lambda_max <= 0.5) {
            return invalid(format!(
                "lambda_max must lie in (0, 0.5] cycles/sample, got {}",
                self.lambda_max
            ));
        }
        if self.signal_len < 2 || !self.signal_len.is_power_of_two() {
            return invalid(format!(
                "signal_len must be a power of two >= 2, got {}",
                self.signal_len
            ));
        }
        if self.averaging_scale == 0 || self.averaging_scale > self.signal_len {
            return invalid(format!(
                "averaging scale T must lie in 1..={}, got {}",
                self.signal_len, self.averaging_scale
            ));
        }
        let cycles = self.lambda_max * 2f64.powi(-(self.j as i32)) * self.signal_len as f64;
        if cycles < 1.0 {
            return invalid(format!(
                "lowest wavelet completes {cycles:.3} cycles in the window; \
                 lambda_max·2^-J·signal_len must be >= 1"
            ));
        }
        Ok(())
    }
}

/// Frequency-domain filterbank plus the FFT plans sized to it.
#[derive(Clone)]
pub struct Filterbank {
    spec: FilterbankSpec,
    mother: MotherWavelet,
    lambdas: Vec<f64>,
    filters: Vec<Vec<Complex64>>,
    lowpass_hat: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Filterbank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Filterbank")
            .field("spec", &self.spec)
            .field("lambdas", &self.lambdas)
            .finish_non_exhaustive()
    }
}

pub fn build_filterbank(spec: &FilterbankSpec) -> Result<Filterbank> {
    spec.validate()?;
    let n = spec.signal_len;
    let mother = MotherWavelet::new(spec.family, spec.q)?;
    let lambdas = build_frequency_grid(spec.lambda_max, spec.q, spec.j)?;
    let nu: Vec<f64> = (0..n).map(|k| bin_frequency(k, n)).collect();
    let filters = lambdas
        .iter()
        .map(|&lambda| nu.iter().map(|&v| mother.eval(v / lambda)).collect())
        .collect();

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    // Periodic Hann window of length T, centered on t = 0 so its DFT is real.
    let t = spec.averaging_scale;
    let mut window = vec![Complex64::new(0.0, 0.0); n];
    let mut total = 0.0;
    for i in 0..t {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / t as f64).cos();
        let pos = (i + n - t / 2) % n;
        window[pos].re += w;
        total += w;
    }
    if total <= 0.0 {
        // T = 1: the Hann window degenerates to a single zero tap; use a Dirac.
        window[0] = Complex64::new(1.0, 0.0);
        total = 1.0;
    }
    for w in window.iter_mut() {
        *w /= total;
    }
    forward.process(&mut window);
    let mut lowpass_hat: Vec<f64> = window.iter().map(|c| c.re).collect();
    lowpass_hat[0] = 1.0;

    Ok(Filterbank {
        spec: spec.clone(),
        mother,
        lambdas,
        filters,
        lowpass_hat,
        forward,
        inverse,
    })
}

impl Filterbank {
    pub fn spec(&self) -> &FilterbankSpec {
        &self.spec
    }

    pub fn mother(&self) -> &MotherWavelet {
        &self.mother
    }

    /// Center frequencies, strictly decreasing.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn filters(&self) -> &[Vec<Complex64>] {
        &self.filters
    }

    pub fn filter(&self, j: usize) -> &[Complex64] {
        &self.filters[j]
    }

    pub fn lowpass_hat(&self) -> &[f64] {
        &self.lowpass_hat
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn signal_len(&self) -> usize {
        self.spec.signal_len
    }

    /// Index of the grid frequency closest to `nu` on a log scale.
    pub fn nearest_index(&self, nu: f64) -> usize {
        let target = nu.ln();
        let mut best = 0;
        for (i, l) in self.lambdas.iter().enumerate() {
            if (l.ln() - target).abs() < (self.lambdas[best].ln() - target).abs() {
                best = i;
            }
        }
        best
    }

    pub(crate) fn fft_forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Unnormalized inverse transform; callers divide by `signal_len`.
    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }

    pub fn spectrum(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft_forward(&mut buf);
        Ok(buf)
    }

    /// Circular convolution with the low-pass window `φ_T`.
    pub fn lowpass(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut buf = self.spectrum(x)?;
        for (b, h) in buf.iter_mut().zip(&self.lowpass_hat) {
            *b *= *h;
        }
        self.fft_inverse(&mut buf);
        let scale = 1.0 / self.signal_len() as f64;
        Ok(buf.iter().map(|c| c.re * scale).collect())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.signal_len() {
            return Err(Error::LengthMismatch {
                expected: self.signal_len(),
                actual: len,
            });
        }
        Ok(())
    }

    /// `Σ_j |ψ̂_j(ν_k)|²` for every bin `k`.
    pub fn littlewood_paley(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.signal_len()];
        for filter in &self.filters {
            for (s, v) in sum.iter_mut().zip(filter) {
                *s += v.norm_sqr();
            }
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        assert_eq!(
            build_frequency_grid(0.25, 1, 3).unwrap(),
            vec![0.25, 0.125, 0.0625]
        );
        let g = build_frequency_grid(0.25, 2, 1).unwrap();
        assert_eq!(g.len(), 2);
        assert!((g[1] - 0.25 * 0.5f64.sqrt()).abs() < 1e-15);
        let g = build_frequency_grid(0.25, 4, 9).unwrap();
        assert_eq!(g.len(), 36);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!((g[0] / g[35] - 2f64.powf(35.0 / 4.0)).abs() < 1e-9);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(build_frequency_grid(0.0, 1, 3).is_err());
        assert!(build_frequency_grid(0.6, 1, 3).is_err());
        assert!(build_frequency_grid(0.25, 0, 3).is_err());
        assert!(build_frequency_grid(0.25, 1, 0).is_err());
    }

    #[test]
    fn shannon_values() {
        let w = MotherWavelet::new(WaveletFamily::ComplexShannon, 1).unwrap();
        assert_eq!(w.eval(1.5), Complex64::new(1.0, 0.0));
        assert_eq!(w.eval(2.0), Complex64::new(1.0, 0.0));
        assert_eq!(w.eval(0.99).norm(), 0.0);
        assert_eq!(w.eval(1.0).norm(), 0.0);
        assert_eq!(w.eval(2.5).norm(), 0.0);
    }

    #[test]
    fn peak_normalization() {
        for family in [WaveletFamily::Morlet, WaveletFamily::Gammatone] {
            let v = evaluate_wavelet_hat(family, 4, 1.0).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-12, "{family}: {v}");
        }
    }

    #[test]
    fn null_average_and_analyticity() {
        for family in WaveletFamily::ALL {
            let w = MotherWavelet::new(family, 2).unwrap();
            assert_eq!(w.eval(0.0).norm(), 0.0);
            assert_eq!(w.eval(-0.5).norm(), 0.0);
            assert_eq!(w.eval(-1.0).norm(), 0.0);
        }
    }

    #[test]
    fn shannon_filter_is_indicator() {
        let spec = FilterbankSpec::new(WaveletFamily::ComplexShannon, 1, 3, 1024);
        let fb = build_filterbank(&spec).unwrap();
        let f = fb.filter(0);
        for (k, v) in f.iter().enumerate() {
            let expected = if (257..=512).contains(&k) { 1.0 } else { 0.0 };
            assert_eq!(v.re, expected, "bin {k}");
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn lowpass_unit_dc_and_real() {
        let spec = FilterbankSpec::new(WaveletFamily::Morlet, 1, 4, 256).with_averaging_scale(64);
        let fb = build_filterbank(&spec).unwrap();
        assert_eq!(fb.lowpass_hat()[0], 1.0);
        // symmetric window -> even spectrum
        let h = fb.lowpass_hat();
        for k in 1..128 {
            assert!((h[k] - h[256 - k]).abs() < 1e-14);
        }
        let y: Vec<f64> = (0..256).map(|t| 1.0 + (t as f64 * 0.3).sin()).collect();
        let smoothed = fb.lowpass(&y).unwrap();
        let mean_in: f64 = y.iter().sum::<f64>() / 256.0;
        let mean_out: f64 = smoothed.iter().sum::<f64>() / 256.0;
        assert!((mean_in - mean_out).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        let ok = FilterbankSpec::new(WaveletFamily::Morlet, 1, 8, 1024);
        assert!(ok.validate().is_ok());
        let too_short = FilterbankSpec::new(WaveletFamily::Morlet, 1, 9, 1024);
        assert!(too_short.validate().is_err());
        let not_pow2 = FilterbankSpec::new(WaveletFamily::Morlet, 1, 2, 1000);
        assert!(not_pow2.validate().is_err());
        let bad_t = ok.clone().with_averaging_scale(2048);
        assert!(bad_t.validate().is_err());
        assert!(build_filterbank(&too_short).is_err());
    }

    #[test]
    fn bin_frequencies() {
        assert_eq!(bin_frequency(0, 8), 0.0);
        assert_eq!(bin_frequency(4, 8), 0.5);
        assert_eq!(bin_frequency(5, 8), -0.375);
    }

    #[test]
    fn family_round_trip_names() {
        for f in WaveletFamily::ALL {
            assert_eq!(f.name().parse::<WaveletFamily>().unwrap(), f);
        }
        assert!("haar".parse::<WaveletFamily>().is_err());
    }
}
