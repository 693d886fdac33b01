//! Wavelet scattering with squared-modulus activation.
//!
//! The cascade `U_1 = |y ∗ ψ_λ|²`, `U_{m+1} = |U_m ∗ ψ_λ'|²` (with `λ' < λ_m`)
//! is computed on frequency-domain filterbanks of Morlet, Gammatone or
//! complex Shannon wavelets. Time-averaged coefficients `S_m` form the
//! feature vector; order 0 is the signal mean, so `Q = 1, J = 8` at orders
//! up to 2 gives `1 + 8 + 28 = 37` coefficients.
//!
//! ```
//! use scatterlab::{build_filterbank, scatter, FilterbankSpec, WaveletFamily};
//!
//! let fb = build_filterbank(&FilterbankSpec::new(WaveletFamily::Morlet, 1, 8, 1024)).unwrap();
//! let y: Vec<f64> = (0..1024).map(|t| (0.1 * t as f64).cos()).collect();
//! let (feature, _layers) = scatter(&y, &fb, 2).unwrap();
//! assert_eq!(feature.len(), 37);
//! ```

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod experiments;
pub mod export;
pub mod filterbank;
pub mod manifold;
pub mod scattering;
pub mod stats;
pub mod svg;
pub mod synthesis;

pub use baselines::{mel_filterbank, mfcc, MfccConfig};
pub use error::{Error, Result};
pub use filterbank::{
    build_filterbank, build_frequency_grid, evaluate_wavelet_hat, Filterbank, FilterbankSpec,
    MotherWavelet, WaveletFamily,
};
pub use manifold::{
    classical_mds, geodesic_distances, isomap, knn_graph, DistanceGraph, Embedding, FeatureMatrix,
    IsomapResult, RowLabel,
};
pub use scattering::{
    layer_energy, propagate_layer, renormalize_second_order, scalogram_power, scatter,
    scatter_with, Activation, MaskingCoefficient, ScatteringFeature, ScatteringLayer,
    ScatteringOptions, ScatteringPath,
};
pub use synthesis::{
    additive_tone, dataset_generate, harmonic_stack, two_tone, AdditiveToneSpec, DatasetConfig,
    HarmonicStackSpec, TwoToneSpec,
};
