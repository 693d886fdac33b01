use std::f64::consts::PI;

use proptest::prelude::*;
use scatterlab::baselines::{log_mel_energies, mel_filterbank};
use scatterlab::export::{read_layer_dump, write_feature_csv, write_layer_dump};
use scatterlab::{build_filterbank, mfcc, scatter, FilterbankSpec, MfccConfig, WaveletFamily};

fn tone(k: usize, n: usize) -> Vec<f64> {
    (0..n).map(|t| (2.0 * PI * (k * t % n) as f64 / n as f64).cos()).collect()
}

#[test]
fn center_bin_tone_peaks_in_its_own_mel_filter() {
    let n = 4096;
    let cfg = MfccConfig::default();
    let fb = mel_filterbank(&cfg, n / 2 + 1).unwrap();
    let bin_hz = cfg.sample_rate / n as f64;
    for m in [3, 10, 20, 39] {
        let k = (fb.centers_hz[m] / bin_hz).round() as usize;
        let e = log_mel_energies(&tone(k, n), &cfg).unwrap();
        let best = (0..e.len()).fold(0, |b, i| if e[i] > e[b] { i } else { b });
        assert_eq!(best, m, "tone at bin {k}");
    }
}

#[test]
fn gain_only_moves_the_first_coefficient() {
    let cfg = MfccConfig::default();
    let y: Vec<f64> = (0..1024).map(|t| (0.05 * t as f64).sin() + 0.3 * (0.31 * t as f64).cos()).collect();
    let c = 3.7;
    let a = mfcc(&y, &cfg).unwrap();
    let b = mfcc(&y.iter().map(|v| c * v).collect::<Vec<_>>(), &cfg).unwrap();
    let shift = (c * c).ln() * (cfg.n_mels as f64).sqrt();
    assert!((b[0] - a[0] - shift).abs() < 1e-9);
    for k in 1..12 {
        assert!((a[k] - b[k]).abs() < 1e-9, "coefficient {k}");
    }
}

#[test]
fn feature_csv_has_37_labelled_columns() {
    let dir = tempfile::tempdir().unwrap();
    let fb = build_filterbank(&FilterbankSpec::new(WaveletFamily::Morlet, 1, 8, 1024)).unwrap();
    let feats: Vec<_> = [40, 90]
        .iter()
        .map(|&k| scatter(&tone(k, 1024), &fb, 2).unwrap().0)
        .collect();
    let path = dir.path().join("f.csv");
    write_feature_csv(&path, &feats).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 38);
    assert_eq!(&header[..4], &["signal", "S0", "S1:0.25", "S1:0.125"]);
    assert_eq!(header[10], "S2:0.25:0.125");
    assert_eq!(header[37], "S2:0.00390625:0.00195312");
    let mut r = csv::Reader::from_path(&path).unwrap();
    let rows: Vec<Vec<f64>> = r
        .records()
        .map(|rec| rec.unwrap().iter().skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    for (row, f) in rows.iter().zip(&feats) {
        assert_eq!(row, &f.to_vector());
    }
}

#[test]
fn layer_dump_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let fb = build_filterbank(&FilterbankSpec::new(WaveletFamily::Gammatone, 2, 3, 256)).unwrap();
    let (_, layers) = scatter(&tone(30, 256), &fb, 2).unwrap();
    let path = dir.path().join("u.bin");
    write_layer_dump(&path, &layers).unwrap();
    let (side, data) = read_layer_dump(&path).unwrap();
    assert_eq!(side.layers.len(), 2);
    for (l, d) in layers.iter().zip(&data) {
        let flat: Vec<f64> = l.data().iter().flatten().copied().collect();
        assert_eq!(&flat, d);
    }
    assert_eq!(side.layers[1].shape, [15, 256]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mfcc_is_finite_and_deterministic(seed in prop::collection::vec(-1.0f64..1.0, 1024)) {
        let cfg = MfccConfig::default();
        let a = mfcc(&seed, &cfg).unwrap();
        prop_assert_eq!(a.len(), 12);
        prop_assert!(a.iter().all(|v| v.is_finite()));
        prop_assert_eq!(a, mfcc(&seed, &cfg).unwrap());
    }
}
