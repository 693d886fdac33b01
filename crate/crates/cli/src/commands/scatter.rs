use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde_json::json;

use scatterlab::export::{
    read_signals, sidecar_path, write_feature_csv, write_filter_magnitudes, write_layer_dump,
    write_masking_table, write_mfcc_csv,
};
use scatterlab::{
    build_filterbank, mfcc, renormalize_second_order, scatter_with, Activation, FilterbankSpec,
    MfccConfig, ScatteringOptions, WaveletFamily,
};

use super::{parse_family, set};
use crate::exit::{classify, output, CliError, CliResult};
use crate::run::{create_dir, Run};

#[derive(Debug, Args)]
pub struct ScatterArgs {
    /// Signal file written by `synth` (CSV, or binary with its JSON sidecar).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// morlet, gammatone or shannon.
    #[arg(long, value_parser = parse_family)]
    family: Option<WaveletFamily>,
    /// Filters per octave.
    #[arg(long)]
    q: Option<u32>,
    /// Octaves.
    #[arg(long)]
    j: Option<u32>,
    /// Center frequency of the highest filter, cycles/sample.
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Deepest scattering order.
    #[arg(long)]
    order: Option<usize>,
    /// Averaging window length in samples (default: whole signal).
    #[arg(long)]
    t: Option<usize>,
    /// Use |·| instead of |·|².
    #[arg(long)]
    modulus: bool,
    /// Also write S2 / S1 as s2_tilde.csv.
    #[arg(long)]
    renormalize: bool,
    /// Guard of the renormalization, relative to max S1.
    #[arg(long)]
    renorm_eps: Option<f64>,
    /// Dump every U_m layer as layers_<signal>.bin.
    #[arg(long)]
    dump_layers: bool,
    /// Write |ψ̂| of every filter to filters.csv.
    #[arg(long)]
    dump_filters: bool,
    /// Also write MFCC baseline features to mfcc.csv.
    #[arg(long)]
    mfcc: bool,
}

pub fn execute(a: ScatterArgs, mut run: Run) -> CliResult<()> {
    let s = &mut run.config.scatter;
    set(&mut s.family, a.family);
    set(&mut s.q, a.q);
    set(&mut s.j, a.j);
    set(&mut s.lambda_max, a.lambda_max);
    set(&mut s.max_order, a.order);
    set(&mut s.renorm_eps, a.renorm_eps);
    if a.t.is_some() {
        s.averaging_scale = a.t;
    }
    s.modulus |= a.modulus;
    s.renormalize |= a.renormalize;
    s.dump_layers |= a.dump_layers;
    s.dump_filters |= a.dump_filters;
    s.mfcc |= a.mfcc;
    let s = s.clone();

    let signals = read_signals(&a.input)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", a.input.display())))?;
    let len = signals[0].len();
    let mut spec = FilterbankSpec::new(s.family, s.q, s.j, len).with_lambda_max(s.lambda_max);
    if let Some(t) = s.averaging_scale {
        spec = spec.with_averaging_scale(t);
    }
    let fb = build_filterbank(&spec).map_err(classify)?;
    let opts = ScatteringOptions {
        activation: if s.modulus {
            Activation::Modulus
        } else {
            Activation::SquaredModulus
        },
        ..ScatteringOptions::new(s.max_order)
    };
    if s.renormalize && s.max_order < 2 {
        return Err(CliError::usage("--renormalize needs --order 2 or more"));
    }

    create_dir(&a.out_dir)?;
    let results = signals
        .par_iter()
        .map(|y| scatter_with(y, &fb, &opts))
        .collect::<scatterlab::Result<Vec<_>>>()
        .map_err(classify)?;
    let mut outputs = Vec::new();
    let features: Vec<_> = results.iter().map(|(f, _)| f.clone()).collect();
    let path = a.out_dir.join("features.csv");
    write_feature_csv(&path, &features).map_err(output)?;
    outputs.push(path);

    if s.renormalize {
        let tables = features
            .iter()
            .map(|f| renormalize_second_order(f, s.renorm_eps))
            .collect::<scatterlab::Result<Vec<_>>>()
            .map_err(classify)?;
        let path = a.out_dir.join("s2_tilde.csv");
        write_masking_table(&path, &tables).map_err(output)?;
        outputs.push(path);
    }
    if s.dump_layers {
        for (i, (_, layers)) in results.iter().enumerate() {
            let path = a.out_dir.join(format!("layers_{i}.bin"));
            write_layer_dump(&path, layers).map_err(output)?;
            outputs.push(sidecar_path(&path));
            outputs.push(path);
        }
    }
    if s.dump_filters {
        let path = a.out_dir.join("filters.csv");
        write_filter_magnitudes(&path, &fb).map_err(output)?;
        outputs.push(path);
    }
    if s.mfcc {
        let cfg = MfccConfig::default();
        let rows = signals
            .par_iter()
            .map(|y| mfcc(y, &cfg))
            .collect::<scatterlab::Result<Vec<_>>>()
            .map_err(classify)?;
        let path = a.out_dir.join("mfcc.csv");
        write_mfcc_csv(&path, &rows).map_err(output)?;
        outputs.push(path);
    }

    let summary = json!({
        "input": a.input.display().to_string(),
        "n_signals": signals.len(),
        "signal_len": len,
        "n_features": features[0].len(),
        "filterbank": spec,
    });
    run.finish(&a.out_dir.join("manifest.json"), Some(&a.out_dir), outputs, summary)?;
    println!(
        "{} signal(s) × {} coefficients → {}",
        signals.len(),
        features[0].len(),
        a.out_dir.display()
    );
    Ok(())
}
