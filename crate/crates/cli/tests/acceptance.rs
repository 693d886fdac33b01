//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scatterlab::experiments::{
    depth_bound, run_depth_decay, run_embedding_experiment, verify_theorem, DepthDecayConfig,
    EmbeddingConfig, MaskingGridConfig, MaskingSetup,
};
use scatterlab::{
    build_filterbank, classical_mds, geodesic_distances, scalogram_power, scatter, DistanceGraph,
    FilterbankSpec, WaveletFamily,
};

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

fn tone(k: usize, a: f64, n: usize) -> Vec<f64> {
    (0..n).map(|t| a * (2.0 * PI * (k * t % n) as f64 / n as f64).cos()).collect()
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: scatterlab::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn pure_tone_amplitude() -> Check {
    let n = 1024;
    let mut worst = 0.0f64;
    for family in WaveletFamily::ALL {
        let fb = lib(build_filterbank(&FilterbankSpec::new(family, 1, 8, n)))?;
        for (j, &lambda) in fb.lambdas().iter().enumerate() {
            let center = family.center_omega(1) * lambda * n as f64;
            if center.fract() != 0.0 || center < 1.0 {
                continue;
            }
            let y = tone(center as usize, 1.0, n);
            let u1 = lib(scalogram_power(&y, &fb))?;
            let expected = 0.5 * fb.mother().eval(family.center_omega(1)).norm();
            for v in u1.row(j) {
                let rel = (v.sqrt() - expected).abs() / expected;
                worst = worst.max(rel);
                ensure(rel <= 1e-9, || format!("{family} λ={lambda}: |CQT| {} vs {expected}", v.sqrt()))?;
            }
        }
    }
    Ok(format!("max relative error {worst:.2e}"))
}

fn feature_dimension() -> Check {
    let n = 1024;
    let fb = lib(build_filterbank(&FilterbankSpec::new(WaveletFamily::Morlet, 1, 8, n)))?;
    let (feat, _) = lib(scatter(&tone(37, 1.0, n), &fb, 2))?;
    let counts: Vec<usize> = (1..=2).map(|m| feat.order(m).count()).collect();
    ensure(feat.len() == 37, || format!("{} coefficients", feat.len()))?;
    ensure(feat.labels()[0] == "S0", || "order 0 missing".into())?;
    Ok(format!("1 + {} + {} = {}", counts[0], counts[1], feat.len()))
}

fn masking_peak() -> Check {
    let setup = lib(MaskingSetup::new(MaskingGridConfig::default()))?;
    let step = 1.0 / setup.config.q as f64;
    let mut notes = Vec::new();
    for rel in [0.02, 0.05, 0.1] {
        let k2 = setup.k2(rel).ok_or("ν2 outside the admissible band")?;
        let dnu = (setup.k1 - k2) as f64 / setup.config.signal_len as f64;
        let profile = lib(setup.profile_bins(1.0, k2))?;
        let peak = setup.lambda2()[argmax(&profile)];
        let octaves = (peak / dnu).log2().abs();
        ensure(octaves <= step + 1e-12, || {
            format!("Δν/ν1={rel}: peak λ2={peak:.3e}, |ν2−ν1|={dnu:.3e}")
        })?;
        notes.push(format!("{rel}: {octaves:.2} oct"));
    }
    Ok(format!("offset from |ν2−ν1| ({})", notes.join(", ")))
}

fn masking_monotonicity() -> Check {
    let setup = lib(MaskingSetup::new(MaskingGridConfig::default()))?;
    let rel = 0.05;
    let k2 = setup.k2(rel).ok_or("ν2 outside the admissible band")?;
    let peak = argmax(&lib(setup.profile_bins(1.0, k2))?);
    let values = (1..=10)
        .map(|i| setup.profile_bins(i as f64 / 10.0, k2).map(|p| p[peak]))
        .collect::<scatterlab::Result<Vec<f64>>>()
        .map_err(|e| e.to_string())?;
    ensure(values.windows(2).all(|w| w[1] > w[0]), || format!("Δν/ν1={rel}: {values:?}"))?;
    Ok(format!(
        "Δν/ν1={rel}, λ2={:.3e}: {:.3e} → {:.3e} over a2/a1 = 0.1…1.0",
        setup.lambda2()[peak],
        values[0],
        values[9]
    ))
}

fn theorem() -> Check {
    let set = [1, 2, 3, 4, 8, 16];
    let rep = lib(verify_theorem(&set, 1e-8))?;
    ensure(rep.passed(), || format!("violations {:?}", rep.violations))?;
    let c3 = rep.curve(3).ok_or("N = 3 missing")?;
    ensure(c3.relative[1] > 1e-3, || format!("N=3 U2 relative energy {}", c3.relative[1]))?;
    let worst = rep.max_beyond_bound.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    Ok(format!("max past bound {worst:.1e}, N=3 U2 {:.3}", c3.relative[1]))
}

fn depth_decay_shape() -> Check {
    let r = lib(run_depth_decay(&DepthDecayConfig::default()))?;
    for c in &r.curves {
        ensure(c.effective_depth == depth_bound(c.n), || {
            format!("N={}: depth {} vs ⌈log2 N⌉ {}", c.n, c.effective_depth, depth_bound(c.n))
        })?;
    }
    let sweep = lib(run_depth_decay(&DepthDecayConfig {
        n_list: (1..=20).chain([24, 32, 48, 64, 96, 128]).collect(),
        ..DepthDecayConfig::default()
    }))?;
    let d: Vec<usize> = sweep.curves.iter().map(|c| c.effective_depth).collect();
    ensure(d.windows(2).all(|w| w[1] >= w[0]), || format!("depths {d:?}"))?;
    let pow2: Vec<usize> = r.curves.iter().map(|c| c.effective_depth).collect();
    Ok(format!("powers of two {pow2:?}, sweep nondecreasing"))
}

fn embedding() -> Check {
    let cfg = EmbeddingConfig::desk();
    let rep = lib(run_embedding_experiment(&cfg))?;
    let n = rep.labels.len();
    ensure(n >= 100, || format!("only {n} signals"))?;
    let s = rep.scattering.assigned_abs_rho();
    let m = &rep.mfcc;
    let f1_axis = m.assignment[0];
    let f1_rho = m.rho[0][f1_axis].abs();
    let other = (1..3).map(|p| m.best_abs_rho_excluding(p, f1_axis)).fold(f64::INFINITY, f64::min);
    let detail = format!(
        "{n} signals, K={}; scattering |ρ| f1 {:.3} α {:.3} r {:.3}; MFCC f1 {f1_rho:.3}, min(α, r) off-axis {other:.3}",
        cfg.k, s[0], s[1], s[2]
    );
    let mut failures = Vec::new();
    if s.iter().any(|v| *v < 0.8) {
        failures.push("scattering below 0.8");
    }
    if f1_rho < 0.8 {
        failures.push("MFCC f1 below 0.8");
    }
    if other > 0.5 {
        failures.push("MFCC spectral shape above 0.5");
    }
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}: {detail}", failures.join(", ")))
    }
}

fn bellman_ford(n: usize, edges: &[(usize, usize, f64)], s: usize) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n];
    d[s] = 0.0;
    loop {
        let mut changed = false;
        for &(a, b, w) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if d[x] + w < d[y] {
                    d[y] = d[x] + w;
                    changed = true;
                }
            }
        }
        if !changed {
            return d;
        }
    }
}

fn gammatone_hat(b: f64, w: f64) -> Complex64 {
    if w <= 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(1.0, b * (w - 1.0)).powi(-4)
    }
}

fn oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..20 {
        let n = 50;
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random::<f64>() < 0.08 {
                    edges.push((a, b, rng.random::<f64>() * 10.0));
                }
            }
        }
        let g = lib(DistanceGraph::from_edges(n, &edges))?;
        let d = geodesic_distances(&g);
        // the matrix is filled from the lower-index endpoint, so compare that orientation
        for i in 0..n {
            let o = bellman_ford(n, &edges, i);
            for j in i..n {
                ensure(d[i * n + j] == o[j] && d[j * n + i] == o[j], || {
                    format!("geodesics differ, graph {trial} ({i}, {j}): {} vs {}", d[i * n + j], o[j])
                })?;
            }
        }
    }

    let mut worst_mds = 0.0f64;
    for _ in 0..10 {
        let p: Vec<[f64; 3]> = (0..10)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let dist = |a: &[f64; 3], b: &[f64; 3]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let d: Vec<f64> = p.iter().flat_map(|a| p.iter().map(move |b| dist(a, b))).collect();
        let r = lib(classical_mds(&d, 10, 3))?.distance_matrix();
        for (a, b) in d.iter().zip(&r) {
            if *a > 0.0 {
                worst_mds = worst_mds.max((a - b).abs() / a);
            }
        }
    }
    ensure(worst_mds <= 1e-8, || format!("MDS relative error {worst_mds:.2e}"))?;

    let n = 4096;
    let fb = lib(build_filterbank(&FilterbankSpec::new(WaveletFamily::Gammatone, 4, 8, n)))?;
    let b = fb.mother().shape();
    let (k1, k2, a1, a2) = (820usize, 779usize, 1.0, 0.6);
    let y: Vec<f64> = tone(k1, a1, n).iter().zip(tone(k2, a2, n)).map(|(x, z)| x + z).collect();
    let (_, layers) = lib(scatter(&y, &fb, 2))?;
    let (nu1, nu2) = (k1 as f64 / n as f64, k2 as f64 / n as f64);
    let peak = layers[1].data().iter().flatten().fold(0.0f64, |m, v| m.max(*v));
    let (mut worst_u2, mut paths) = (0.0f64, 0);
    for (path, row) in layers[1].paths().iter().zip(layers[1].data()) {
        let (l1, l2) = (path.lambdas()[0], path.lambdas()[1]);
        let cross = gammatone_hat(b, nu1 / l1) * gammatone_hat(b, nu2 / l1).conj();
        let expected = (a1 * a2 / 4.0f64).powi(2) * cross.norm_sqr() * gammatone_hat(b, (nu1 - nu2) / l2).norm_sqr();
        if expected < 1e-6 * peak {
            continue;
        }
        paths += 1;
        for v in row {
            worst_u2 = worst_u2.max((v - expected).abs() / expected);
        }
    }
    ensure(paths >= 5, || format!("only {paths} cross-term paths above threshold"))?;
    ensure(worst_u2 <= 1e-6, || format!("U2 relative error {worst_u2:.2e}"))?;
    Ok(format!("geodesics exact on 20 graphs, MDS {worst_mds:.1e}, U2 {worst_u2:.1e} over {paths} paths"))
}

fn cli(dir: &Path, jobs: usize, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_scatterlab"))
        .current_dir(dir)
        .env_remove("SCATTERLAB_SEED")
        .args(["--jobs", &jobs.to_string(), "--seed", "7"])
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn run_all(dir: &Path, jobs: usize) -> Result<(), String> {
    cli(dir, jobs, &["synth", "additive", "--alpha", "1.0", "--r", "0.5", "--f1", "16"])?;
    cli(dir, jobs, &["synth", "stack", "--n", "8", "--f1", "4"])?;
    cli(dir, jobs, &["synth", "two-tone", "--nu1", "0.2", "--nu2", "0.19"])?;
    cli(dir, jobs, &["synth", "dataset", "--desk-scale", "--steps", "6", "--out", "dataset.csv"])?;
    cli(dir, jobs, &[
        "scatter", "--input", "dataset.csv", "--out-dir", "scatter", "--renormalize", "--mfcc", "--dump-filters",
    ])?;
    cli(dir, jobs, &["scatter", "--input", "two_tone.csv", "--out-dir", "scatter_gt", "--family", "gammatone", "--q", "4", "--j", "9", "--renormalize"])?;
    cli(dir, jobs, &["experiment", "masking-grid", "--amp-steps", "3", "--freq-steps", "4", "--out-dir", "masking"])?;
    cli(dir, jobs, &["experiment", "depth-decay", "--out-dir", "depth"])?;
    cli(dir, jobs, &["experiment", "verify-theorem", "--n", "1,2,3,4,8", "--out-dir", "theorem"])?;
    cli(dir, jobs, &["experiment", "embed", "--desk-scale", "--steps", "10", "--k", "30", "--out-dir", "embed"])?;
    Ok(())
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: Vec<(usize, PathBuf)> = [1, 4, 4]
        .iter()
        .enumerate()
        .map(|(i, &j)| (j, tmp.path().join(format!("run{i}"))))
        .collect();
    for (jobs, dir) in &runs {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        run_all(dir, *jobs)?;
    }
    let files = csv_files(&runs[0].1);
    ensure(files.len() >= 15, || format!("only {} CSV files", files.len()))?;
    for (_, dir) in &runs[1..] {
        ensure(csv_files(dir) == files, || "different CSV file sets".into())?;
        for f in &files {
            let a = std::fs::read(runs[0].1.join(f)).map_err(|e| e.to_string())?;
            let b = std::fs::read(dir.join(f)).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("{} differs", f.display()))?;
        }
    }
    Ok(format!("{} CSV files identical across --jobs 1, 4, 4", files.len()))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "pure-tone CQT amplitude", limit: Some(Duration::from_secs(1)), run: pure_tone_amplitude },
        Criterion { id: 2, name: "feature dimension 37", limit: None, run: feature_dimension },
        Criterion { id: 3, name: "masking peak localization", limit: Some(Duration::from_secs(10)), run: masking_peak },
        Criterion { id: 4, name: "masking monotonicity", limit: Some(Duration::from_secs(10)), run: masking_monotonicity },
        Criterion { id: 5, name: "depth bound on harmonic stacks", limit: Some(Duration::from_secs(30)), run: theorem },
        Criterion { id: 6, name: "depth-decay shape", limit: Some(Duration::from_secs(60)), run: depth_decay_shape },
        Criterion { id: 7, name: "embedding disentanglement", limit: Some(Duration::from_secs(60)), run: embedding },
        Criterion { id: 8, name: "oracle equivalences", limit: Some(Duration::from_secs(30)), run: oracles },
        Criterion { id: 9, name: "determinism across --jobs", limit: None, run: determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut result = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(msg), Some(limit)) = (&result, c.limit) {
            if elapsed > limit {
                result = Err(format!("{msg}; took {elapsed:.2?}, limit {limit:?}"));
            }
        }
        let (tag, msg) = match &result {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("{tag} criterion {} ({}) [{elapsed:.2?}]: {msg}", c.id, c.name);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
