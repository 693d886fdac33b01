//! Run configuration: defaults, overridden by a TOML file, overridden by flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use scatterlab::export::SignalFormat;
use scatterlab::experiments::MaskingGridConfig;
use scatterlab::synthesis::AdditiveToneSpec;
use scatterlab::WaveletFamily;

use crate::exit::{CliError, CliResult};

pub const SEED_ENV: &str = "SCATTERLAB_SEED";

/// Everything a run can be configured with. The same layout is accepted by
/// `--config` and written next to each run's manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub synth: SynthSection,
    pub scatter: ScatterSettings,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub additive: AdditiveSettings,
    pub stack: StackSettings,
    #[serde(rename = "two-tone")]
    pub two_tone: TwoToneSettings,
    pub dataset: DatasetSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdditiveSettings {
    pub alpha: f64,
    pub r: f64,
    pub f1: u32,
    pub harmonics: u32,
    pub window: usize,
    pub format: SignalFormat,
}

impl Default for AdditiveSettings {
    fn default() -> Self {
        AdditiveSettings {
            alpha: 1.0,
            r: 0.5,
            f1: 16,
            harmonics: AdditiveToneSpec::DEFAULT_HARMONICS,
            window: AdditiveToneSpec::DEFAULT_WINDOW,
            format: SignalFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StackSettings {
    pub n: u32,
    pub f1: u32,
    pub a1: f64,
    pub phi1: f64,
    pub len: usize,
    pub format: SignalFormat,
}

impl Default for StackSettings {
    fn default() -> Self {
        StackSettings {
            n: 8,
            f1: 4,
            a1: 1.0,
            phi1: 0.0,
            len: 4096,
            format: SignalFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoToneSettings {
    pub a1: f64,
    pub a2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub len: usize,
    pub format: SignalFormat,
}

impl Default for TwoToneSettings {
    fn default() -> Self {
        TwoToneSettings {
            a1: 1.0,
            a2: 1.0,
            nu1: 0.2,
            nu2: 0.19,
            phi1: 0.0,
            phi2: 0.0,
            len: 4096,
            format: SignalFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSettings {
    /// `None` for the full 50 × 50 grid with random fundamentals.
    pub desk_steps: Option<usize>,
    pub format: SignalFormat,
}

impl Default for DatasetSettings {
    fn default() -> Self {
        DatasetSettings {
            desk_steps: None,
            format: SignalFormat::Binary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterSettings {
    pub family: WaveletFamily,
    pub q: u32,
    pub j: u32,
    pub lambda_max: f64,
    /// `None` averages over the whole signal.
    pub averaging_scale: Option<usize>,
    pub max_order: usize,
    pub modulus: bool,
    pub renormalize: bool,
    pub renorm_eps: f64,
    pub mfcc: bool,
    pub dump_layers: bool,
    pub dump_filters: bool,
}

impl Default for ScatterSettings {
    fn default() -> Self {
        ScatterSettings {
            family: WaveletFamily::Morlet,
            q: 1,
            j: 8,
            lambda_max: 0.25,
            averaging_scale: None,
            max_order: 2,
            modulus: false,
            renormalize: false,
            renorm_eps: scatterlab::scattering::DEFAULT_RENORM_EPS,
            mfcc: false,
            dump_layers: false,
            dump_filters: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(rename = "masking-grid")]
    pub masking_grid: MaskingSettings,
    #[serde(rename = "depth-decay")]
    pub depth_decay: DepthSettings,
    pub embed: EmbedSettings,
    #[serde(rename = "verify-theorem")]
    pub verify_theorem: TheoremSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskingSettings {
    pub family: WaveletFamily,
    pub q: u32,
    pub j: u32,
    pub lambda_max: f64,
    pub signal_len: usize,
    pub nu1: f64,
    pub amp_steps: usize,
    pub amp_min: f64,
    pub amp_max: f64,
    pub freq_steps: usize,
    pub freq_min: f64,
    pub freq_max: f64,
}

impl Default for MaskingSettings {
    fn default() -> Self {
        let d = MaskingGridConfig::default();
        MaskingSettings {
            family: d.family,
            q: d.q,
            j: d.j,
            lambda_max: d.lambda_max,
            signal_len: d.signal_len,
            nu1: d.nu1,
            amp_steps: d.amp_steps,
            amp_min: d.amp_range.0,
            amp_max: d.amp_range.1,
            freq_steps: d.freq_steps,
            freq_min: d.freq_range.0,
            freq_max: d.freq_range.1,
        }
    }
}

impl MaskingSettings {
    pub fn to_config(&self) -> MaskingGridConfig {
        MaskingGridConfig {
            family: self.family,
            q: self.q,
            j: self.j,
            lambda_max: self.lambda_max,
            signal_len: self.signal_len,
            nu1: self.nu1,
            amp_steps: self.amp_steps,
            amp_range: (self.amp_min, self.amp_max),
            freq_steps: self.freq_steps,
            freq_range: (self.freq_min, self.freq_max),
            ..MaskingGridConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DepthSettings {
    pub n: Vec<u32>,
    pub f1: u32,
    pub signal_len: usize,
    pub j: u32,
    pub max_depth: usize,
    pub threshold: f64,
}

impl Default for DepthSettings {
    fn default() -> Self {
        let d = scatterlab::experiments::DepthDecayConfig::default();
        DepthSettings {
            n: d.n_list,
            f1: d.f1,
            signal_len: d.signal_len,
            j: d.j,
            max_depth: d.max_depth,
            threshold: d.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedSettings {
    /// Full 50 × 50 dataset with K = 100 instead of the desk grid.
    pub full: bool,
    pub desk_steps: usize,
    /// Defaults to 50 on the desk grid and 100 at full scale.
    pub k: Option<usize>,
    pub family: WaveletFamily,
    pub log: bool,
    pub standardize: bool,
}

impl Default for EmbedSettings {
    fn default() -> Self {
        EmbedSettings {
            full: false,
            desk_steps: 20,
            k: None,
            family: WaveletFamily::Morlet,
            log: false,
            standardize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoremSettings {
    pub n: Vec<u32>,
    pub tolerance: f64,
}

impl Default for TheoremSettings {
    fn default() -> Self {
        TheoremSettings {
            n: vec![1, 2, 4, 8],
            tolerance: 1e-8,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }
}

/// `--seed`, then the config file, then `SCATTERLAB_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>, env: Option<&str>) -> CliResult<u64> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        None => Ok(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some(2), Some("3")).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some(2), Some("3")).unwrap(), 2);
        assert_eq!(resolve_seed(None, None, Some("3")).unwrap(), 3);
        assert_eq!(resolve_seed(None, None, None).unwrap(), 0);
        assert!(resolve_seed(None, None, Some("x")).is_err());
    }

    #[test]
    fn toml_roundtrip() {
        let mut c = RunConfig {
            seed: Some(9),
            ..RunConfig::default()
        };
        c.scatter.family = WaveletFamily::Gammatone;
        c.experiment.depth_decay.n = vec![1, 3];
        let back: RunConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c: RunConfig = toml::from_str("[experiment.masking-grid]\namp_steps = 4\n").unwrap();
        assert_eq!(c.experiment.masking_grid.amp_steps, 4);
        assert_eq!(c.experiment.masking_grid.freq_steps, 32);
        assert_eq!(c.scatter, ScatterSettings::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("[scatter]\nqq = 1\n").is_err());
    }
}
