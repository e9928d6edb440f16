//! Acceptance criteria. Runs as a plain binary so that every criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sae_probe::classifier::{cross_validate, macro_f1, train_logistic, LogisticModel, SoftmaxObjective, TrainConfig};
use sae_probe::harness::{
    generate_synthetic, overlap_table, sampling_sweep, transfer_matrix, FeaturePermutation, FeatureStrategy,
    LabeledSource, SweepSettings, SyntheticSpec, TransferCell,
};
use sae_probe::pooling::{binarize, pool_dataset, sum_pool, topn_token_pool, MatrixMeta, PooledMatrix, PoolingStrategy, Rows};
use sae_probe::select::{mean_diff_scores, top_n_features};
use sae_probe::store::{decode_dump, encode_dump, DumpManifest, ExampleRecord, SparseTokenFeatures};

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> std::result::Result<(), String> {
    ensure(elapsed <= Duration::from_secs(limit_s), || format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64()))
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

// ---------------------------------------------------------------- pooling

fn random_record(rng: &mut ChaCha8Rng, id: u64, width: usize) -> ExampleRecord {
    let tokens = (0..rng.random_range(1..=12))
        .map(|_| {
            let k = rng.random_range(0..=width.min(24));
            let idx = rand::seq::index::sample(rng, width, k);
            let mut positions: Vec<u32> = idx.into_iter().map(|i| i as u32).collect();
            positions.sort_unstable();
            let entries = positions
                .into_iter()
                .map(|i| {
                    // Coarse values so that ties inside a token are common.
                    let v = if rng.random_bool(0.3) { rng.random_range(1..=4) as f32 * 0.25 } else { rng.random_range(0.001f32..3.0) };
                    (i, v)
                })
                .collect();
            SparseTokenFeatures { entries }
        })
        .collect();
    ExampleRecord { example_id: id, tokens, last_hidden: None, label: 0, language: None }
}

fn dense_sum(r: &ExampleRecord, width: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; width];
    for t in &r.tokens {
        let mut dense = vec![0.0f32; width];
        for &(i, v) in &t.entries {
            dense[i as usize] = v;
        }
        let keep: Vec<usize> = if n == 0 {
            (0..width).collect()
        } else {
            // Brute-force rank: an index is kept when fewer than n active
            // entries beat it (larger value, or equal value at a lower index).
            (0..width)
                .filter(|&i| dense[i] > 0.0)
                .filter(|&i| (0..width).filter(|&j| dense[j] > dense[i] || (dense[j] == dense[i] && j < i && dense[j] > 0.0)).count() < n)
                .collect()
        };
        for i in keep {
            out[i] += f64::from(dense[i]);
        }
    }
    out
}

fn pooling_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for id in 0..1000 {
        let width = rng.random_range(1..=256);
        let r = random_record(&mut rng, id, width);
        let n = [0, 1, 3, 20][id as usize % 4];
        let got = if n == 0 { sum_pool(&r, width) } else { topn_token_pool(&r, n, width) };
        let want = dense_sum(&r, width, n);
        let dense = got.to_dense();
        for (a, b) in dense.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
        ensure(worst <= 1e-9, || format!("example {id}: pooled value off by {worst:e}"))?;
        let threshold = [1.0, 0.5, 2.0][id as usize % 3];
        let active = binarize(&got, threshold).active;
        let expect: Vec<u32> = (0..width).filter(|&i| want[i] > threshold).map(|i| i as u32).collect();
        ensure(active == expect, || format!("example {id}: binarized support differs"))?;
    }
    within(start.elapsed(), 5)?;
    Ok(format!("1000 examples, max abs error {worst:e}, {:.2}s", start.elapsed().as_secs_f64()))
}

// ------------------------------------------------------------- classifier

fn dense_matrix(rows: Vec<Vec<f64>>, labels: Vec<usize>, classes: usize) -> PooledMatrix {
    let width = rows.first().map_or(0, Vec::len);
    PooledMatrix::new(Rows::Dense(rows), labels, width, MatrixMeta::anonymous(classes))
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize, f: usize, c: usize) -> PooledMatrix {
    let rows = (0..n).map(|_| (0..f).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    // Every class present.
    let labels = (0..n).map(|i| if i < c { i } else { rng.random_range(0..c) }).collect();
    dense_matrix(rows, labels, c)
}

/// Independent objective: mean cross-entropy + l2 / (2N) * ||W||^2, bias
/// unpenalized. `w[c][j]`, `b[c]`.
fn oracle_objective(x: &[Vec<f64>], y: &[usize], w: &[Vec<f64>], b: &[f64], l2: f64) -> (f64, Vec<Vec<f64>>, Vec<f64>) {
    let n = x.len() as f64;
    let c = b.len();
    let mut gw = vec![vec![0.0; w[0].len()]; c];
    let mut gb = vec![0.0; c];
    let mut loss = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z: Vec<f64> = (0..c).map(|k| b[k] + row.iter().zip(&w[k]).map(|(a, b)| a * b).sum::<f64>()).collect();
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = z.iter().map(|v| (v - m).exp()).sum();
        loss += m + s.ln() - z[label];
        for k in 0..c {
            let p = (z[k] - m).exp() / s - if k == label { 1.0 } else { 0.0 };
            gb[k] += p / n;
            for (g, xv) in gw[k].iter_mut().zip(row) {
                *g += p * xv / n;
            }
        }
    }
    let mut reg = 0.0;
    for k in 0..c {
        for (g, &wv) in gw[k].iter_mut().zip(&w[k]) {
            reg += wv * wv;
            *g += l2 / n * wv;
        }
    }
    (loss / n + l2 / (2.0 * n) * reg, gw, gb)
}

fn rows_of(m: &PooledMatrix) -> Vec<Vec<f64>> {
    (0..m.len()).map(|i| m.dense_row(i)).collect()
}

fn gradient_descent(x: &[Vec<f64>], y: &[usize], c: usize, l2: f64) -> f64 {
    let f = x[0].len();
    let n = x.len() as f64;
    let radius = x.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0).fold(0.0, f64::max);
    let step = 1.0 / (radius + l2 / n);
    let mut w = vec![vec![0.0; f]; c];
    let mut b = vec![0.0; c];
    let mut value = f64::INFINITY;
    for _ in 0..3_000_000 {
        let (v, gw, gb) = oracle_objective(x, y, &w, &b, l2);
        value = v;
        let gmax = gw.iter().flatten().chain(&gb).fold(0.0f64, |a, g| a.max(g.abs()));
        if gmax < 1e-11 {
            break;
        }
        for k in 0..c {
            b[k] -= step * gb[k];
            for j in 0..f {
                w[k][j] -= step * gw[k][j];
            }
        }
    }
    value
}

fn model_objective(model: &LogisticModel, x: &[Vec<f64>], y: &[usize], l2: f64) -> f64 {
    let w: Vec<Vec<f64>> = (0..model.class_count()).map(|c| model.class_weights(c).to_vec()).collect();
    oracle_objective(x, y, &w, model.biases(), l2).0
}

fn bisection_root() -> f64 {
    // a = 2 (1 - sigmoid(2a)) on [0, 2].
    let g = |a: f64| a - 2.0 * (1.0 - 1.0 / (1.0 + (-2.0 * a).exp()));
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn classifier_correctness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_grad = 0.0f64;
    for inst in 0..20 {
        let m = random_instance(&mut rng, 10, 5, 3);
        let l2 = [0.1, 1.0, 5.0][inst % 3];
        let obj = SoftmaxObjective::new(&m, l2);
        let theta: Vec<f64> = (0..obj.param_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut grad = vec![0.0; theta.len()];
        obj.value_and_gradient(&theta, &mut grad);
        let h = 1e-5;
        let fd: Vec<f64> = (0..theta.len())
            .map(|i| {
                let (mut p, mut q) = (theta.clone(), theta.clone());
                p[i] += h;
                q[i] -= h;
                (obj.value(&p) - obj.value(&q)) / (2.0 * h)
            })
            .collect();
        let diff = grad.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = grad.iter().map(|a| a * a).sum::<f64>().sqrt() + fd.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rel = diff / scale.max(1e-300);
        worst_grad = worst_grad.max(rel);
        ensure(rel <= 1e-5, || format!("instance {inst}: gradient relative error {rel:e}"))?;
    }

    let mut worst_gap = 0.0f64;
    for inst in 0..10 {
        let (m, l2) = if inst == 9 {
            // Linearly separable 2-D set with weak regularization.
            let rows = vec![
                vec![1.0, 2.0],
                vec![2.0, 1.5],
                vec![1.5, 1.0],
                vec![2.5, 2.5],
                vec![-1.0, -1.0],
                vec![-2.0, -0.5],
                vec![-0.5, -2.0],
                vec![-1.5, -1.5],
            ];
            (dense_matrix(rows, vec![1, 1, 1, 1, 0, 0, 0, 0], 2), 1e-3)
        } else {
            (random_instance(&mut rng, 30, 5, 3), [0.1, 1.0, 10.0][inst % 3])
        };
        let x = rows_of(&m);
        let model = train_logistic(&m, &TrainConfig { l2_strength: l2, ..TrainConfig::default() }).map_err(|e| e.to_string())?;
        let ours = model_objective(&model, &x, &m.labels, l2);
        let oracle = gradient_descent(&x, &m.labels, m.class_count(), l2);
        let gap = (ours - oracle).abs();
        worst_gap = worst_gap.max(gap);
        ensure(gap <= 1e-6, || format!("instance {inst}: objective {ours} vs oracle {oracle}"))?;
    }

    let root = bisection_root();
    let m = dense_matrix(vec![vec![-1.0], vec![1.0]], vec![0, 1], 2);
    let model = train_logistic(&m, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let (w0, w1) = (model.class_weights(0)[0], model.class_weights(1)[0]);
    ensure((w1 - root).abs() <= 1e-6 && (w0 + root).abs() <= 1e-6, || {
        format!("1-D weights ({w0}, {w1}), oracle +-{root}")
    })?;
    within(start.elapsed(), 30)?;
    Ok(format!(
        "grad rel err {worst_grad:.1e}, objective gap {worst_gap:.1e}, 1-D weight {w1:.9} vs {root:.9}, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

// -------------------------------------------------------------- pipeline

fn end_to_end() -> Check {
    let start = Instant::now();
    let spec = SyntheticSpec { seed: 11, ..SyntheticSpec::default() };
    ensure(spec.width == 16384 && spec.examples_per_class == 500 && spec.planted_features_per_class == 10, || {
        "default spec changed".into()
    })?;
    let (cv, recovered) = single_threaded(|| -> std::result::Result<_, String> {
        let d = generate_synthetic(&spec).map_err(|e| e.to_string())?;
        let cv = cross_validate(&d, &PoolingStrategy::default(), &TrainConfig::default(), 5).map_err(|e| e.to_string())?;
        let raw = pool_dataset(&d, &PoolingStrategy::new(0, false)).map_err(|e| e.to_string())?;
        let top = top_n_features(&mean_diff_scores(&raw).map_err(|e| e.to_string())?, 20).map_err(|e| e.to_string())?;
        let planted = spec.planted_features(1).map_err(|e| e.to_string())?;
        Ok((cv, planted.iter().filter(|p| top.indices.contains(p)).count()))
    })?;
    ensure(cv.mean >= 0.95, || format!("5-fold mean macro-F1 {:.4}", cv.mean))?;
    ensure(recovered >= 8, || format!("mean-diff top-20 recovered {recovered}/10 planted"))?;
    within(start.elapsed(), 60)?;
    Ok(format!("CV macro-F1 {:.4} (std {:.4}), planted recovered {recovered}/10, {:.1}s", cv.mean, cv.std, start.elapsed().as_secs_f64()))
}

fn language(seed: u64, tag: &str, permutation: Option<FeaturePermutation>, id_offset: u64) -> LabeledSource {
    let spec = SyntheticSpec {
        width: 4096,
        examples_per_class: 200,
        seed,
        language_tag: Some(tag.into()),
        feature_permutation: permutation,
        id_offset,
        ..SyntheticSpec::default()
    };
    LabeledSource::new(tag, generate_synthetic(&spec).unwrap())
}

fn cell<'a>(cells: &'a [TransferCell], train: &str, test: &str) -> &'a TransferCell {
    cells.iter().find(|c| c.train_source == train && c.test_target == test).unwrap()
}

fn transfer_ordering() -> Check {
    let start = Instant::now();
    let strategy = FeatureStrategy::full_sae_binarized();
    let config = TrainConfig::default();
    let shared = [language(21, "A", None, 0), language(22, "B", None, 100_000)];
    let cells = transfer_matrix(&shared, &strategy, &config, 5).map_err(|e| e.to_string())?;
    for t in ["A", "B"] {
        for s in ["A", "B"] {
            let (native, transfer) = (cell(&cells, t, t).macro_f1, cell(&cells, s, t).macro_f1);
            ensure(native >= transfer, || format!("target {t}: native {native:.4} < transfer from {s} {transfer:.4}"))?;
        }
    }
    let shared_off = cell(&cells, "A", "B").macro_f1;

    let permuted = [language(31, "A", None, 0), language(32, "P", Some(FeaturePermutation::Rotate(2048)), 100_000)];
    let cells = transfer_matrix(&permuted, &strategy, &config, 5).map_err(|e| e.to_string())?;
    let mut diag = f64::INFINITY;
    let mut off = 0.0f64;
    for c in &cells {
        if c.is_native() {
            diag = diag.min(c.macro_f1);
        } else {
            off = off.max(c.macro_f1);
        }
    }
    ensure(diag >= 0.95, || format!("permuted pair diagonal {diag:.4}"))?;
    ensure(off <= 0.6, || format!("permuted pair off-diagonal {off:.4}"))?;
    within(start.elapsed(), 90)?;
    Ok(format!(
        "shared A->B {shared_off:.4}; permuted diagonal min {diag:.4}, off-diagonal max {off:.4}, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn sweep_trend() -> Check {
    let start = Instant::now();
    let native = language(41, "A", None, 0);
    let settings = SweepSettings { rates: vec![0.1, 0.25, 0.5, 1.0], seeds: 3, test_fraction: 0.2 };
    let points = sampling_sweep(&native, None, &[FeatureStrategy::full_sae_binarized()], &TrainConfig::default(), &settings)
        .map_err(|e| e.to_string())?;
    ensure(points.len() == 4 && points.iter().all(|p| p.per_seed_macro_f1.len() == 3), || "wrong sweep shape".into())?;
    let curve: Vec<f64> = points.iter().map(|p| p.macro_f1).collect();
    for w in curve.windows(2) {
        ensure(w[1] >= w[0] - 0.03, || format!("curve {curve:?} drops by more than 0.03"))?;
    }
    Ok(format!("3-seed means {:?}, {:.1}s", curve.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(), start.elapsed().as_secs_f64()))
}

// --------------------------------------------------------------- overlap

fn model_ranking(top: &[usize], width: usize) -> LogisticModel {
    let mut w = vec![0.0; width];
    for (r, &i) in top.iter().enumerate() {
        w[i] = 100.0 - r as f64;
    }
    let neg = w.iter().map(|v| -v).collect();
    LogisticModel::from_class_weights(vec![neg, w], vec![0.0, 0.0]).unwrap()
}

fn overlap_arithmetic() -> Check {
    let width = 100;
    let top20: Vec<usize> = (0..20).collect();
    let cases: [(&str, Vec<usize>, usize, f64); 3] = [
        // Top-6 sets sharing 4: 4 / 8.
        ("half", vec![0, 1, 2, 3, 50, 51], 6, 0.5),
        ("third", (10..30).collect(), 20, 10.0 / 30.0),
        ("none", (60..80).collect(), 20, 0.0),
    ];
    let mut seen = Vec::new();
    for (name, other, k, want) in cases {
        let base: Vec<usize> = top20[..k].to_vec();
        let models: BTreeMap<String, LogisticModel> =
            [("a".to_string(), model_ranking(&base, width)), ("b".to_string(), model_ranking(&other, width))].into_iter().collect();
        let rows = overlap_table(&models, k).map_err(|e| e.to_string())?;
        ensure(rows.len() == 4, || "expected 4 ordered pairs".into())?;
        for r in &rows {
            let expect = if r.train_lang == r.test_lang { 1.0 } else { want };
            ensure(r.overlap == expect, || format!("{name}: {}->{} = {} want {expect}", r.train_lang, r.test_lang, r.overlap))?;
        }
        seen.push(format!("{:.4}", want));
    }
    Ok(format!("self-pairs 1.0, cross pairs {}", seen.join(" / ")))
}

// ----------------------------------------------------------- determinism

fn write_fixture(dir: &Path) {
    std::fs::write(
        dir.join("spec.toml"),
        "width = 1024\nexamples_per_class = 60\nplanted_features_per_class = 5\nseed = 5\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("run.toml"),
        "experiment = \"cv\"\noutput_dir = \"cv\"\nseed = 3\nfolds = 5\n\n[[dumps]]\ntag = \"en\"\npath = \"d.saed\"\n",
    )
    .unwrap();
}

fn cli(dir: &Path, root: &Path, args: &[&str]) -> std::result::Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sae-probe"))
        .args(args)
        .current_dir(dir)
        .env("SAE_PROBE_OUTPUT_ROOT", root)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
}

fn format_determinism() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let manifest = DumpManifest {
        model_id: "m".into(),
        layer_index: 3,
        sae_width: 256,
        hidden_dim: 2,
        task_name: "t".into(),
        label_names: vec!["x".into(), "y".into()],
        language: Some("en".into()),
        sae_l0: Some(12.5),
        format_version: 1,
    };
    let records: Vec<ExampleRecord> = (0..200)
        .map(|id| {
            let mut r = random_record(&mut rng, id, 256);
            r.tokens.retain(|t| !t.entries.is_empty());
            if r.tokens.is_empty() {
                r.tokens.push(SparseTokenFeatures { entries: vec![(0, 1.0)] });
            }
            r.label = (id % 2) as u32;
            r.last_hidden = if id % 3 == 0 { None } else { Some(vec![rng.random(), -1.5]) };
            r
        })
        .collect();
    let d = sae_probe::store::Dataset::new(manifest, records).map_err(|e| e.to_string())?;
    let first = encode_dump(&d).map_err(|e| e.to_string())?;
    let second = encode_dump(&decode_dump(&first).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(first == second, || "write->read->write changed bytes".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_fixture(dir.path());
    let (r1, r2) = (dir.path().join("root1"), dir.path().join("root2"));
    cli(dir.path(), &r1, &["synth", "spec.toml", "--out", "d.saed"])?;
    cli(dir.path(), &r1, &["run", "run.toml"])?;
    cli(dir.path(), &r2, &["run", "run.toml"])?;
    let a = std::fs::read(r1.join("cv/report.csv")).map_err(|e| e.to_string())?;
    let b = std::fs::read(r2.join("cv/report.csv")).map_err(|e| e.to_string())?;
    ensure(a == b, || "report.csv differs between runs".into())?;
    let rows = String::from_utf8_lossy(&a).lines().count();
    ensure(rows == 7, || format!("report.csv has {rows} lines, want header + 5 folds + mean"))?;
    Ok(format!("dump {} bytes stable; report.csv identical across runs ({} bytes)", first.len(), a.len()))
}

// --------------------------------------------------------------- metrics

fn brute_macro_f1(t: &[usize], p: &[usize], classes: usize) -> f64 {
    let mut sum = 0.0;
    for c in 0..classes {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fne = 0usize;
        for (&a, &b) in t.iter().zip(p) {
            match (a == c, b == c) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fne += 1,
                _ => {}
            }
        }
        let denom = 2 * tp + fp + fne;
        sum += if denom == 0 { 0.0 } else { (2 * tp) as f64 / denom as f64 };
    }
    sum / classes as f64
}

fn macro_f1_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_classes = 0;
    for i in 0..1000 {
        let classes = rng.random_range(1..=77);
        max_classes = max_classes.max(classes);
        let n = rng.random_range(0..300);
        let t: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
        // Mix accurate and random predictors.
        let acc = rng.random_range(0.0..1.0);
        let p: Vec<usize> = t.iter().map(|&y| if rng.random_bool(acc) { y } else { rng.random_range(0..classes) }).collect();
        let got = macro_f1(&t, &p, classes).map_err(|e| e.to_string())?;
        let want = brute_macro_f1(&t, &p, classes);
        ensure(got == want, || format!("vector {i}: {got} != {want}"))?;
    }
    Ok(format!("1000 label vectors, up to {max_classes} classes, exact"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("pooling and binarization oracle", pooling_oracle),
        ("classifier correctness", classifier_correctness),
        ("end-to-end planted signal", end_to_end),
        ("native vs. transfer ordering", transfer_ordering),
        ("sampling sweep trend", sweep_trend),
        ("overlap arithmetic", overlap_arithmetic),
        ("format determinism", format_determinism),
        ("macro-F1 oracle", macro_f1_oracle),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
