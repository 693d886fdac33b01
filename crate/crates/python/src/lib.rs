//! Python bindings: synthesis, scattering, MFCC, Isomap and the depth check.
//!
//! Signals cross the boundary as lists of floats.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use scatterlab::experiments::{depth_bound as core_depth_bound, verify_theorem as core_verify};
use scatterlab::{FilterbankSpec, ScatteringOptions, WaveletFamily};

fn to_py(e: scatterlab::Error) -> PyErr {
    match e {
        scatterlab::Error::NonFinite(_) | scatterlab::Error::Numerical(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn family(name: &str) -> PyResult<WaveletFamily> {
    name.parse().map_err(to_py)
}

/// Frequency-domain wavelet filterbank for one signal length.
#[pyclass(module = "pyscatterlab")]
struct Filterbank {
    inner: scatterlab::Filterbank,
}

#[pymethods]
impl Filterbank {
    #[new]
    #[pyo3(signature = (family = "morlet", q = 1, j = 8, signal_len = 1024, lambda_max = 0.25, averaging_scale = None))]
    fn new(
        family: &str,
        q: u32,
        j: u32,
        signal_len: usize,
        lambda_max: f64,
        averaging_scale: Option<usize>,
    ) -> PyResult<Self> {
        let mut spec = FilterbankSpec::new(self::family(family)?, q, j, signal_len).with_lambda_max(lambda_max);
        if let Some(t) = averaging_scale {
            spec = spec.with_averaging_scale(t);
        }
        let inner = scatterlab::build_filterbank(&spec).map_err(to_py)?;
        Ok(Filterbank { inner })
    }

    /// Center frequencies, cycles/sample, highest first.
    #[getter]
    fn lambdas(&self) -> Vec<f64> {
        self.inner.lambdas().to_vec()
    }

    #[getter]
    fn signal_len(&self) -> usize {
        self.inner.signal_len()
    }

    #[getter]
    fn family(&self) -> String {
        self.inner.spec().family.name().to_string()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `|ψ̂_λ|` of filter `index` at every DFT bin.
    fn magnitude(&self, index: usize) -> PyResult<Vec<f64>> {
        if index >= self.inner.len() {
            return Err(PyValueError::new_err(format!("filter index {index} out of range")));
        }
        Ok(self.inner.filter(index).iter().map(|h| h.norm()).collect())
    }

    /// `U_1 = |y ∗ ψ_λ|²`, one row per filter.
    fn scalogram(&self, signal: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let layer = scatterlab::scalogram_power(&signal, &self.inner).map_err(to_py)?;
        Ok(layer.data().to_vec())
    }

    /// Scattering coefficients up to `max_order` (order 0 is the mean).
    #[pyo3(signature = (signal, max_order = 2, modulus = false))]
    fn scatter(&self, signal: Vec<f64>, max_order: usize, modulus: bool) -> PyResult<Feature> {
        let opts = ScatteringOptions {
            activation: if modulus {
                scatterlab::Activation::Modulus
            } else {
                scatterlab::Activation::SquaredModulus
            },
            ..ScatteringOptions::new(max_order)
        };
        let (f, layers) = scatterlab::scatter_with(&signal, &self.inner, &opts).map_err(to_py)?;
        let energies = layers.iter().map(scatterlab::layer_energy).collect();
        Ok(Feature {
            labels: f.labels(),
            values: f.to_vector(),
            layer_energies: energies,
            inner: f,
        })
    }

    /// `(λ1, λ2, S2/S1)` for every second-order path.
    #[pyo3(signature = (signal, rel_eps = scatterlab::scattering::DEFAULT_RENORM_EPS))]
    fn renormalized(&self, signal: Vec<f64>, rel_eps: f64) -> PyResult<Vec<(f64, f64, f64)>> {
        let (f, _) = scatterlab::scatter(&signal, &self.inner, 2).map_err(to_py)?;
        let table = scatterlab::renormalize_second_order(&f, rel_eps).map_err(to_py)?;
        Ok(table.iter().map(|c| (c.lambdas.0, c.lambdas.1, c.value)).collect())
    }
}

/// Scattering feature vector with its path labels.
#[pyclass(module = "pyscatterlab")]
struct Feature {
    #[pyo3(get)]
    labels: Vec<String>,
    #[pyo3(get)]
    values: Vec<f64>,
    /// `energy(U_m)` for each computed layer.
    #[pyo3(get)]
    layer_energies: Vec<f64>,
    inner: scatterlab::ScatteringFeature,
}

#[pymethods]
impl Feature {
    fn __len__(&self) -> usize {
        self.values.len()
    }

    /// Coefficient of the path given by filter indices; `None` if absent.
    fn get(&self, filters: Vec<usize>) -> Option<f64> {
        self.inner.get(&filters)
    }
}

#[pyfunction]
#[pyo3(signature = (a1, a2, nu1, nu2, signal_len, phi1 = 0.0, phi2 = 0.0))]
fn two_tone(a1: f64, a2: f64, nu1: f64, nu2: f64, signal_len: usize, phi1: f64, phi2: f64) -> PyResult<Vec<f64>> {
    scatterlab::two_tone(&scatterlab::TwoToneSpec {
        a1,
        a2,
        nu1,
        nu2,
        phi1,
        phi2,
        signal_len,
    })
    .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (alpha, r, f1, n_harmonics = 32, window_len = 1024))]
fn additive_tone(alpha: f64, r: f64, f1: u32, n_harmonics: u32, window_len: usize) -> PyResult<Vec<f64>> {
    let spec = scatterlab::AdditiveToneSpec {
        n_harmonics,
        window_len,
        ..scatterlab::AdditiveToneSpec::new(alpha, r, f1)
    };
    scatterlab::additive_tone(&spec).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, f1, signal_len = 4096, a1 = 1.0, phi1 = 0.0))]
fn harmonic_stack(n: u32, f1: u32, signal_len: usize, a1: f64, phi1: f64) -> PyResult<Vec<f64>> {
    let spec = scatterlab::HarmonicStackSpec {
        a1,
        phi1,
        ..scatterlab::HarmonicStackSpec::new(n, f1, signal_len)
    };
    scatterlab::harmonic_stack(&spec).map_err(to_py)
}

/// Twelve MFCCs with the default mel configuration.
#[pyfunction]
fn mfcc(signal: Vec<f64>) -> PyResult<Vec<f64>> {
    scatterlab::mfcc(&signal, &scatterlab::MfccConfig::default()).map_err(to_py)
}

#[pyfunction]
fn depth_bound(n: u32) -> usize {
    core_depth_bound(n)
}

/// `(passed, [(N, max relative energy past the bound)], [(N, m, value)])`.
#[pyfunction]
#[pyo3(signature = (n_list, tolerance = 1e-8))]
#[allow(clippy::type_complexity)]
fn verify_theorem(n_list: Vec<u32>, tolerance: f64) -> PyResult<(bool, Vec<(u32, f64)>, Vec<(u32, usize, f64)>)> {
    let rep = core_verify(&n_list, tolerance).map_err(to_py)?;
    let violations = rep.violations.iter().map(|v| (v.n, v.m, v.value)).collect();
    Ok((rep.passed(), rep.max_beyond_bound.clone(), violations))
}

/// Isomap of the rows; returns `(coords, eigenvalues, kept)` where `coords`
/// covers the rows listed in `kept` (the largest kNN component).
#[pyfunction]
#[pyo3(signature = (rows, k, dim = 3))]
#[allow(clippy::type_complexity)]
fn isomap(rows: Vec<Vec<f64>>, k: usize, dim: usize) -> PyResult<(Vec<Vec<f64>>, Vec<f64>, Vec<usize>)> {
    let x = scatterlab::FeatureMatrix::from_rows(rows).map_err(to_py)?;
    let r = scatterlab::isomap(&x, k, dim).map_err(to_py)?;
    let e = &r.embedding;
    let coords = (0..e.n).map(|i| e.point(i).to_vec()).collect();
    Ok((coords, e.eigenvalues.clone(), r.kept))
}

#[pyfunction]
fn spearman(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    scatterlab::stats::spearman(&a, &b).map_err(to_py)
}

#[pymodule]
fn pyscatterlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Filterbank>()?;
    m.add_class::<Feature>()?;
    m.add_function(wrap_pyfunction!(two_tone, m)?)?;
    m.add_function(wrap_pyfunction!(additive_tone, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_stack, m)?)?;
    m.add_function(wrap_pyfunction!(mfcc, m)?)?;
    m.add_function(wrap_pyfunction!(depth_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify_theorem, m)?)?;
    m.add_function(wrap_pyfunction!(isomap, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_resolve() {
        assert_eq!(family("shannon").unwrap(), WaveletFamily::ComplexShannon);
        assert_eq!(family("morlet").unwrap(), WaveletFamily::Morlet);
        assert!(family("haar").is_err());
    }
}
