//! Scattering cascade with squared-modulus activation.
//!
//! `U_1 = |y ∗ ψ_λ1|²`, `U_{m+1} = |U_m ∗ ψ_λ{m+1}|²` with `λ_{m+1} < λ_m`,
//! and `S_m = ⟨U_m ∗ φ_T⟩_t`. Convolutions are circular.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::filterbank::{Filterbank, WaveletFamily};

/// Pointwise nonlinearity applied after each wavelet convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// `|z|²`
    #[default]
    SquaredModulus,
    /// `|z|`
    Modulus,
}

impl Activation {
    #[inline]
    fn apply(self, z: Complex64) -> f64 {
        match self {
            Activation::SquaredModulus => z.norm_sqr(),
            Activation::Modulus => z.norm(),
        }
    }
}

/// Sequence of filter indices `(j_1, …, j_m)` with strictly increasing index,
/// i.e. strictly decreasing center frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringPath {
    filters: Vec<usize>,
    lambdas: Vec<f64>,
}

impl ScatteringPath {
    pub fn new(filters: Vec<usize>, fb: &Filterbank) -> Result<Self> {
        if filters.is_empty() {
            return invalid("a scattering path has at least one filter");
        }
        if filters.windows(2).any(|w| w[1] <= w[0]) {
            return invalid(format!(
                "path {filters:?} is not strictly decreasing in frequency"
            ));
        }
        if let Some(&bad) = filters.iter().find(|&&j| j >= fb.len()) {
            return invalid(format!("filter index {bad} outside filterbank of {}", fb.len()));
        }
        let lambdas = filters.iter().map(|&j| fb.lambdas()[j]).collect();
        Ok(ScatteringPath { filters, lambdas })
    }

    fn extend(&self, j: usize, lambda: f64) -> Self {
        let mut filters = self.filters.clone();
        filters.push(j);
        let mut lambdas = self.lambdas.clone();
        lambdas.push(lambda);
        ScatteringPath { filters, lambdas }
    }

    pub fn order(&self) -> usize {
        self.filters.len()
    }

    pub fn filters(&self) -> &[usize] {
        &self.filters
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn last_filter(&self) -> usize {
        *self.filters.last().expect("paths are never empty")
    }

    /// Column label `S{m}:λ1[:λ2…]` with each λ at 6 significant digits.
    pub fn label(&self) -> String {
        let mut s = format!("S{}", self.order());
        for l in &self.lambdas {
            s.push(':');
            s.push_str(&crate::export::format_sig6(*l));
        }
        s
    }
}

impl fmt::Display for ScatteringPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The tensor `U_m`, one time series per path.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringLayer {
    depth: usize,
    paths: Vec<ScatteringPath>,
    data: Vec<Vec<f64>>,
}

impl ScatteringLayer {
    pub fn new(depth: usize, paths: Vec<ScatteringPath>, data: Vec<Vec<f64>>) -> Result<Self> {
        if paths.len() != data.len() {
            return invalid("one time series per path is required");
        }
        if paths.iter().any(|p| p.order() != depth) {
            return invalid(format!("every path of a depth-{depth} layer must have length {depth}"));
        }
        Ok(ScatteringLayer { depth, paths, data })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn paths(&self) -> &[ScatteringPath] {
        &self.paths
    }

    pub fn data(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i]
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Keep only the paths for which `keep` returns true.
    pub fn retain(&mut self, mut keep: impl FnMut(&ScatteringPath) -> bool) {
        let mut paths = Vec::new();
        let mut data = Vec::new();
        for (p, d) in self.paths.drain(..).zip(self.data.drain(..)) {
            if keep(&p) {
                paths.push(p);
                data.push(d);
            }
        }
        self.paths = paths;
        self.data = data;
    }
}

/// Spec echo stored with every feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub family: WaveletFamily,
    pub q: u32,
    pub j: u32,
    pub averaging_scale: usize,
    pub lambda_max: f64,
    pub signal_len: usize,
    pub activation: Activation,
}

/// Time-averaged invariant coefficients `S_0 … S_M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringFeature {
    pub order0: f64,
    pub coeffs: Vec<(ScatteringPath, f64)>,
    pub meta: FeatureMeta,
}

impl ScatteringFeature {
    /// Number of coefficients including order 0.
    pub fn len(&self) -> usize {
        1 + self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `[S0, S1…, S2…, …]` in path enumeration order.
    pub fn to_vector(&self) -> Vec<f64> {
        std::iter::once(self.order0)
            .chain(self.coeffs.iter().map(|(_, v)| *v))
            .collect()
    }

    /// Column labels matching [`to_vector`](Self::to_vector).
    pub fn labels(&self) -> Vec<String> {
        std::iter::once("S0".to_string())
            .chain(self.coeffs.iter().map(|(p, _)| p.label()))
            .collect()
    }

    pub fn get(&self, filters: &[usize]) -> Option<f64> {
        self.coeffs
            .iter()
            .find(|(p, _)| p.filters() == filters)
            .map(|(_, v)| *v)
    }

    pub fn order(&self, m: usize) -> impl Iterator<Item = &(ScatteringPath, f64)> {
        self.coeffs.iter().filter(move |(p, _)| p.order() == m)
    }

    pub fn max_order(&self) -> usize {
        self.coeffs.iter().map(|(p, _)| p.order()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringOptions {
    pub max_order: usize,
    pub activation: Activation,
    /// Stop the cascade once a layer's energy drops below this absolute value.
    pub energy_floor: f64,
    /// Restrict the first layer to these filter indices (all when `None`).
    pub first_order: Option<Vec<usize>>,
}

impl ScatteringOptions {
    pub const DEFAULT_ENERGY_FLOOR: f64 = 1e-30;

    pub fn new(max_order: usize) -> Self {
        ScatteringOptions {
            max_order,
            activation: Activation::SquaredModulus,
            energy_floor: Self::DEFAULT_ENERGY_FLOOR,
            first_order: None,
        }
    }
}

fn first_layer(
    spectrum: Vec<Complex64>,
    fb: &Filterbank,
    activation: Activation,
    subset: Option<&[usize]>,
) -> Result<ScatteringLayer> {
    let indices: Vec<usize> = match subset {
        Some(s) => s.to_vec(),
        None => (0..fb.len()).collect(),
    };
    let paths = indices
        .iter()
        .map(|&j| ScatteringPath::new(vec![j], fb))
        .collect::<Result<Vec<_>>>()?;
    let data = indices
        .par_iter()
        .map(|&j| filter_and_activate(&spectrum, fb, j, activation))
        .collect();
    ScatteringLayer::new(1, paths, data)
}

fn filter_and_activate(
    spectrum: &[Complex64],
    fb: &Filterbank,
    j: usize,
    activation: Activation,
) -> Vec<f64> {
    let scale = 1.0 / fb.signal_len() as f64;
    let mut buf: Vec<Complex64> = spectrum
        .iter()
        .zip(fb.filter(j))
        .map(|(x, h)| x * h)
        .collect();
    fb.fft_inverse(&mut buf);
    buf.iter().map(|&z| activation.apply(z * scale)).collect()
}

/// `U_1[λ, t] = |(y ∗ ψ_λ)(t)|²` for every λ of the filterbank.
pub fn scalogram_power(signal: &[f64], fb: &Filterbank) -> Result<ScatteringLayer> {
    let spectrum = fb.spectrum(signal)?;
    first_layer(spectrum, fb, Activation::SquaredModulus, None)
}

/// Scalogram of a complex-valued input.
pub fn scalogram_power_complex(signal: &[Complex64], fb: &Filterbank) -> Result<ScatteringLayer> {
    fb.check_len(signal.len())?;
    let mut spectrum = signal.to_vec();
    fb.fft_forward(&mut spectrum);
    first_layer(spectrum, fb, Activation::SquaredModulus, None)
}

fn check_layer(layer: &ScatteringLayer, fb: &Filterbank) -> Result<()> {
    for (path, row) in layer.paths.iter().zip(&layer.data) {
        fb.check_len(row.len())?;
        for (&j, &l) in path.filters.iter().zip(&path.lambdas) {
            if j >= fb.len() || fb.lambdas()[j] != l {
                return Err(Error::SpecMismatch(format!(
                    "path {} was not produced by this filterbank",
                    path.label()
                )));
            }
        }
    }
    Ok(())
}

/// `U_{m+1}[p⊕λ', t] = |(U_m[p] ∗ ψ_λ')(t)|²` for every `λ' < λ_m`.
///
/// Returns an empty layer when no admissible `λ'` exists.
pub fn propagate_layer(prev: &ScatteringLayer, fb: &Filterbank) -> Result<ScatteringLayer> {
    propagate_with(prev, fb, Activation::SquaredModulus)
}

fn propagate_with(
    prev: &ScatteringLayer,
    fb: &Filterbank,
    activation: Activation,
) -> Result<ScatteringLayer> {
    check_layer(prev, fb)?;
    let children: Vec<Vec<(ScatteringPath, Vec<f64>)>> = prev
        .paths
        .par_iter()
        .zip(prev.data.par_iter())
        .map(|(path, row)| {
            let first_child = path.last_filter() + 1;
            if first_child >= fb.len() {
                return Vec::new();
            }
            let mut spectrum: Vec<Complex64> =
                row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fb.fft_forward(&mut spectrum);
            (first_child..fb.len())
                .map(|j| {
                    (
                        path.extend(j, fb.lambdas()[j]),
                        filter_and_activate(&spectrum, fb, j, activation),
                    )
                })
                .collect()
        })
        .collect();
    let (paths, data) = children.into_iter().flatten().unzip();
    ScatteringLayer::new(prev.depth + 1, paths, data)
}

/// Squared ℓ² norm of the layer tensor, summed path by path in order.
pub fn layer_energy(layer: &ScatteringLayer) -> f64 {
    layer
        .data
        .iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>())
        .sum()
}

/// Global time average of `x ∗ φ_T`. Since `φ̂_T(0) = 1` this equals the mean of `x`.
fn invariant_average(x: &[f64], fb: &Filterbank) -> f64 {
    x.iter().sum::<f64>() * fb.lowpass_hat()[0] / x.len() as f64
}

/// Cascade up to `max_order` (or natural termination) with default options.
pub fn scatter(
    signal: &[f64],
    fb: &Filterbank,
    max_order: usize,
) -> Result<(ScatteringFeature, Vec<ScatteringLayer>)> {
    scatter_with(signal, fb, &ScatteringOptions::new(max_order))
}

pub fn scatter_with(
    signal: &[f64],
    fb: &Filterbank,
    opts: &ScatteringOptions,
) -> Result<(ScatteringFeature, Vec<ScatteringLayer>)> {
    if opts.max_order == 0 {
        return invalid("max_order must be at least 1");
    }
    if let Some(v) = signal.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("input signal ({v})")));
    }
    let spectrum = fb.spectrum(signal)?;
    let order0 = invariant_average(signal, fb);
    let mut layers = vec![first_layer(
        spectrum,
        fb,
        opts.activation,
        opts.first_order.as_deref(),
    )?];
    while layers.len() < opts.max_order {
        let last = layers.last().expect("non-empty");
        if last.is_empty() || layer_energy(last) < opts.energy_floor {
            break;
        }
        let next = propagate_with(last, fb, opts.activation)?;
        if next.is_empty() {
            break;
        }
        layers.push(next);
    }
    let feature = feature_from_layers(order0, &layers, fb, opts.activation);
    Ok((feature, layers))
}

/// Time-average every path of `layers` into a feature.
pub fn feature_from_layers(
    order0: f64,
    layers: &[ScatteringLayer],
    fb: &Filterbank,
    activation: Activation,
) -> ScatteringFeature {
    let coeffs = layers
        .iter()
        .flat_map(|layer| {
            layer
                .paths
                .iter()
                .zip(&layer.data)
                .map(|(p, row)| (p.clone(), invariant_average(row, fb)))
        })
        .collect();
    let spec = fb.spec();
    ScatteringFeature {
        order0,
        coeffs,
        meta: FeatureMeta {
            family: spec.family,
            q: spec.q,
            j: spec.j,
            averaging_scale: spec.averaging_scale,
            lambda_max: spec.lambda_max,
            signal_len: spec.signal_len,
            activation,
        },
    }
}

/// Second-order coefficient divided by its first-order parent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskingCoefficient {
    pub filters: (usize, usize),
    pub lambdas: (f64, f64),
    pub value: f64,
}

/// Default guard for [`renormalize_second_order`], relative to `max S1`.
pub const DEFAULT_RENORM_EPS: f64 = 1e-12;

/// `S̃2(λ1, λ2) = S2(λ1, λ2) / (S1(λ1) + ε)` with `ε = rel_eps · max S1`.
/// Entries whose parent `S1(λ1) ≤ ε` are reported as 0.
pub fn renormalize_second_order(
    feat: &ScatteringFeature,
    rel_eps: f64,
) -> Result<Vec<MaskingCoefficient>> {
    if feat.max_order() < 2 {
        return invalid("renormalization needs first- and second-order coefficients");
    }
    let s1_max = feat.order(1).map(|(_, v)| *v).fold(0.0, f64::max);
    let eps = rel_eps * s1_max;
    feat.order(2)
        .map(|(path, s2)| {
            let (j1, j2) = (path.filters()[0], path.filters()[1]);
            let s1 = feat.get(&[j1]).ok_or_else(|| {
                Error::InvalidParameter(format!("missing first-order parent of {}", path.label()))
            })?;
            let value = if s1 <= eps { 0.0 } else { s2 / (s1 + eps) };
            Ok(MaskingCoefficient {
                filters: (j1, j2),
                lambdas: (path.lambdas()[0], path.lambdas()[1]),
                value,
            })
        })
        .collect()
}
