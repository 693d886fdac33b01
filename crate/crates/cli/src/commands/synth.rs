use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde_json::json;

use scatterlab::export::{sidecar_path, write_signals, SignalFormat};
use scatterlab::synthesis::DatasetConfig;
use scatterlab::{additive_tone, harmonic_stack, two_tone, AdditiveToneSpec, HarmonicStackSpec, TwoToneSpec};

use super::set;
use crate::exit::{classify, output, CliError, CliResult};
use crate::run::Run;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Bin,
}

impl From<FormatArg> for SignalFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => SignalFormat::Csv,
            FormatArg::Bin => SignalFormat::Binary,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Signal file; `.csv` selects CSV, anything else raw little-endian f64.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Subcommand)]
pub enum SynthCmd {
    /// Hann-windowed additive tone with spectral slope α and odd/even balance r.
    Additive {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        /// Fundamental in cycles per window.
        #[arg(long)]
        f1: Option<u32>,
        #[arg(long)]
        harmonics: Option<u32>,
        #[arg(long)]
        window: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Unwindowed stack of N equal harmonics on exact DFT bins.
    Stack {
        #[arg(long)]
        n: Option<u32>,
        /// Fundamental as a DFT bin index.
        #[arg(long)]
        f1: Option<u32>,
        #[arg(long)]
        a1: Option<f64>,
        #[arg(long)]
        phi1: Option<f64>,
        #[arg(long)]
        len: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sum of two cosines.
    TwoTone {
        #[arg(long)]
        a1: Option<f64>,
        #[arg(long)]
        a2: Option<f64>,
        /// cycles/sample
        #[arg(long)]
        nu1: Option<f64>,
        /// cycles/sample
        #[arg(long)]
        nu2: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        phi1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        phi2: Option<f64>,
        #[arg(long)]
        len: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Grid of additive tones: 50 × 50 with random fundamentals, or a desk-scale grid.
    Dataset {
        /// Reduced grid with cycling fundamentals.
        #[arg(long)]
        desk_scale: bool,
        /// Grid steps per axis at desk scale (default 20).
        #[arg(long, requires = "desk_scale")]
        steps: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
}

impl SynthCmd {
    pub fn name(&self) -> &'static str {
        match self {
            SynthCmd::Additive { .. } => "additive",
            SynthCmd::Stack { .. } => "stack",
            SynthCmd::TwoTone { .. } => "two-tone",
            SynthCmd::Dataset { .. } => "dataset",
        }
    }
}

/// Resolves the output path and format; an explicit path fixes the format
/// through its extension.
fn resolve_out(out: &OutArgs, configured: &mut SignalFormat, stem: &str) -> CliResult<PathBuf> {
    let from_path = out.out.as_deref().map(SignalFormat::from_path);
    let format = out.format.map(SignalFormat::from).or(from_path).unwrap_or(*configured);
    if let (Some(p), Some(fp)) = (&out.out, from_path) {
        if fp != format {
            return Err(CliError::usage(format!(
                "{} does not match --format {}; CSV files need a .csv extension",
                p.display(),
                format.extension()
            )));
        }
    }
    *configured = format;
    Ok(out
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{stem}.{}", format.extension()))))
}

fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn emit(run: &Run, path: &Path, signals: &[Vec<f64>], format: SignalFormat, meta: serde_json::Value) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        crate::run::create_dir(parent)?;
    }
    write_signals(path, signals, format, meta).map_err(output)?;
    let summary = json!({ "n_signals": signals.len(), "signal_len": signals[0].len() });
    run.finish(
        &manifest_path(path),
        None,
        vec![path.to_path_buf(), sidecar_path(path)],
        summary,
    )?;
    println!("wrote {} signal(s) to {}", signals.len(), path.display());
    Ok(())
}

pub fn execute(cmd: SynthCmd, mut run: Run) -> CliResult<()> {
    let seed = run.seed();
    match cmd {
        SynthCmd::Additive { alpha, r, f1, harmonics, window, out } => {
            let s = &mut run.config.synth.additive;
            set(&mut s.alpha, alpha);
            set(&mut s.r, r);
            set(&mut s.f1, f1);
            set(&mut s.harmonics, harmonics);
            set(&mut s.window, window);
            let path = resolve_out(&out, &mut s.format, "additive")?;
            let spec = AdditiveToneSpec {
                n_harmonics: s.harmonics,
                window_len: s.window,
                ..AdditiveToneSpec::new(s.alpha, s.r, s.f1)
            };
            let format = s.format;
            let y = additive_tone(&spec).map_err(classify)?;
            emit(&run, &path, &[y], format, json!({ "spec": spec, "seed": seed }))
        }
        SynthCmd::Stack { n, f1, a1, phi1, len, out } => {
            let s = &mut run.config.synth.stack;
            set(&mut s.n, n);
            set(&mut s.f1, f1);
            set(&mut s.a1, a1);
            set(&mut s.phi1, phi1);
            set(&mut s.len, len);
            let path = resolve_out(&out, &mut s.format, "stack")?;
            let spec = HarmonicStackSpec {
                a1: s.a1,
                phi1: s.phi1,
                ..HarmonicStackSpec::new(s.n, s.f1, s.len)
            };
            let format = s.format;
            let y = harmonic_stack(&spec).map_err(classify)?;
            emit(&run, &path, &[y], format, json!({ "spec": spec, "seed": seed }))
        }
        SynthCmd::TwoTone { a1, a2, nu1, nu2, phi1, phi2, len, out } => {
            let s = &mut run.config.synth.two_tone;
            set(&mut s.a1, a1);
            set(&mut s.a2, a2);
            set(&mut s.nu1, nu1);
            set(&mut s.nu2, nu2);
            set(&mut s.phi1, phi1);
            set(&mut s.phi2, phi2);
            set(&mut s.len, len);
            let path = resolve_out(&out, &mut s.format, "two_tone")?;
            let spec = TwoToneSpec {
                a1: s.a1,
                a2: s.a2,
                nu1: s.nu1,
                nu2: s.nu2,
                phi1: s.phi1,
                phi2: s.phi2,
                signal_len: s.len,
            };
            let format = s.format;
            let y = two_tone(&spec).map_err(classify)?;
            emit(&run, &path, &[y], format, json!({ "spec": spec, "seed": seed }))
        }
        SynthCmd::Dataset { desk_scale, steps, out } => {
            let s = &mut run.config.synth.dataset;
            if desk_scale {
                s.desk_steps = Some(steps.or(s.desk_steps).unwrap_or(20));
            }
            let path = resolve_out(&out, &mut s.format, "dataset")?;
            let format = s.format;
            let cfg = match s.desk_steps {
                Some(steps) => DatasetConfig::desk(steps),
                None => DatasetConfig::full(seed),
            };
            let data = cfg.generate().map_err(classify)?;
            let specs: Vec<&AdditiveToneSpec> = data.iter().map(|(s, _)| s).collect();
            let signals: Vec<Vec<f64>> = data.iter().map(|(_, y)| y.clone()).collect();
            let meta = json!({ "dataset": cfg, "seed": seed, "tones": specs });
            emit(&run, &path, &signals, format, meta)
        }
    }
}
