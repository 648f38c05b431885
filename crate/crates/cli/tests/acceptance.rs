//! Acceptance checks. The criteria run one after another so the
//! timing-based ones are not disturbed by concurrent work. Each prints one
//! PASS/FAIL line, and the process exits nonzero if any criterion fails.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mpclust_core::consensus::{confusion, StopTracker};
use mpclust_core::dataio::{write_matrix, LoadOptions};
use mpclust_core::dist::{deviation_experiment, hoeffding_bound, pairwise_dense, Metric};
use mpclust_core::hclust::{cut_k, ward_linkage};
use mpclust_core::metrics::{ari, f1_features, select_by_score};
use mpclust_core::pipeline::{
    consensus_baseline, plain_hierarchical, run, tune_minipatch_size, Engine, HyperParams, Mode, StopReason,
};
use mpclust_core::rng::{substream, Phase};
use mpclust_core::stats::median;
use mpclust_core::synthgen::{generate, separable_blobs, SynthSpec};
use mpclust_core::DataMatrix;
use rand::Rng;

use oracle::{groups, naive_ward, pair_count_ari};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut worst_height = 0.0f64;
    let mut mismatches = 0;
    for case in 0..200u64 {
        let mut rng = substream(1000 + case, Phase::Baseline, 0);
        let n = rng.random_range(2..=12);
        let m = rng.random_range(1..=8);
        let values: Vec<f64> = (0..n * m).map(|_| rng.random_range(-10.0..10.0)).collect();
        let d = pairwise_dense(&values, n, m, Metric::Manhattan).unwrap();
        let dense: Vec<f64> = (0..n * n).map(|x| d.get(x / n, x % n)).collect();
        let (heights, partitions) = naive_ward(&dense, n);
        let tree = ward_linkage(&d);
        let mut ours = tree.heights();
        let mut theirs = heights;
        ours.sort_by(f64::total_cmp);
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            worst_height = worst_height.max((a - b).abs());
        }
        for k in 1..=n {
            if groups(&cut_k(&tree, k).unwrap()) != partitions[n - k] {
                mismatches += 1;
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && worst_height <= 1e-9 && secs < 10.0,
        format!("partition mismatches {mismatches}, max height error {worst_height:.2e}, {secs:.2}s"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let mut rng = substream(2000 + case, Phase::Baseline, 0);
        let n = rng.random_range(2..=50);
        let (ka, kb) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        worst = worst.max((ari(&a, &b).unwrap() - pair_count_ari(&a, &b)).abs());
    }
    let mean = (0..1000u64)
        .map(|trial| {
            let mut rng = substream(3000 + trial, Phase::Baseline, 0);
            let a: Vec<usize> = (0..50).map(|_| rng.random_range(0..3)).collect();
            let b: Vec<usize> = (0..50).map(|_| rng.random_range(0..3)).collect();
            ari(&a, &b).unwrap()
        })
        .sum::<f64>()
        / 1000.0;
    outcome(
        worst <= 1e-12 && mean.abs() <= 0.01,
        format!("max deviation from pair counting {worst:.2e}, mean random ARI {mean:+.4}"),
    )
}

fn criterion_3() -> Outcome {
    let d = generate(&SynthSpec { n_obs: 50, n_features: 200, n_signal: 10, snr: 6.0, seed: 3, ..SynthSpec::default() })
        .unwrap();
    let n = 50;
    let mut failures = Vec::new();
    for mode in [Mode::Mpcc, Mode::Mpacc, Mode::Impacc] {
        let hp = HyperParams { k_final: Some(4), seed: 11, keep_log: true, ..HyperParams::default() };
        let r = run(&d.matrix, mode, &hp).unwrap();
        let mut v = vec![0u32; n * n];
        let mut co = vec![0u32; n * n];
        for mp in r.log.as_ref().unwrap() {
            for (a, &i) in mp.rows.iter().enumerate() {
                for (b, &j) in mp.rows.iter().enumerate() {
                    co[i * n + j] += 1;
                    v[i * n + j] += u32::from(mp.labels[a] == mp.labels[b]);
                }
            }
        }
        let exact = (0..n * n).all(|x| {
            let expected = if co[x] == 0 { 0.0 } else { f64::from(v[x]) / f64::from(co[x]) };
            r.consensus.values()[x] == expected
        });
        let symmetric = (0..n).all(|i| (0..n).all(|j| r.consensus.get(i, j) == r.consensus.get(j, i)));
        let in_unit = r.consensus.values().iter().all(|s| (0.0..=1.0).contains(s));
        let conf_ok = confusion(&r.consensus).iter().all(|c| (0.0..=0.25).contains(c));
        if !(exact && symmetric && in_unit && conf_ok) {
            failures.push(format!("{}: exact {exact} symmetric {symmetric} unit {in_unit} confusion {conf_ok}", mode.name()));
        }
    }
    let detail = if failures.is_empty() { "mpcc, mpacc, impacc logs reproduce S exactly".into() } else { failures.join("; ") };
    outcome(failures.is_empty(), detail)
}

fn criterion_4() -> Outcome {
    let started = Instant::now();
    let (n, m) = (40, 100);
    let mut rng = substream(4, Phase::Baseline, 0);
    let values: Vec<f64> = (0..n * m).map(|_| rng.random::<f64>()).collect();
    let data = DataMatrix::from_values(n, m, values).unwrap();
    let trials = 10_000;
    let eps = [0.05, 0.1, 0.2, 0.3];
    let mut violations = Vec::new();
    let mut worst_margin = f64::INFINITY;
    for m_feat in [5, 10, 20] {
        let report = deviation_experiment(&data, Metric::Manhattan, m_feat, trials, &eps, 40 + m_feat as u64).unwrap();
        for row in &report.rows {
            let b = hoeffding_bound(m_feat, m, row.eps).unwrap();
            let allowance = b + 3.0 * (b * (1.0 - b) / trials as f64).sqrt();
            worst_margin = worst_margin.min(allowance - row.exceedance);
            if row.exceedance > allowance {
                violations.push(format!("m={m_feat} eps={}: {} > {allowance:.4}", row.eps, row.exceedance));
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        violations.is_empty() && secs < 30.0,
        format!("12 cells, smallest slack {worst_margin:.4}, {secs:.2}s {}", violations.join("; ")),
    )
}

fn criterion_5() -> Outcome {
    let started = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for snr in [4.0, 6.0, 8.0] {
        let (mut impacc_ari, mut plain_ari, mut f1s) = (Vec::new(), Vec::new(), Vec::new());
        for seed in 1..=5u64 {
            let d = generate(&SynthSpec { n_obs: 200, n_features: 1000, n_signal: 10, snr, rho: 0.5, seed, ..SynthSpec::default() })
                .unwrap();
            let hp = HyperParams { k_final: Some(4), seed, ..HyperParams::default() };
            let r = run(&d.matrix, Mode::Impacc, &hp).unwrap();
            impacc_ari.push(ari(&r.labels, &d.labels).unwrap());
            let selected = select_by_score(r.feature_scores.as_ref().unwrap());
            f1s.push(f1_features(&selected, &d.signal_mask).unwrap());
            plain_ari.push(ari(&plain_hierarchical(&d.matrix, 4, Metric::Manhattan).unwrap(), &d.labels).unwrap());
        }
        let (mi, mp, mf) = (median(&impacc_ari).unwrap(), median(&plain_ari).unwrap(), median(&f1s).unwrap());
        ok &= mi >= mp;
        if snr == 8.0 {
            ok &= mf >= 0.9 && mi >= 0.8;
        }
        lines.push(format!("snr {snr}: impacc ARI {mi:.3} F1 {mf:.3}, plain ARI {mp:.3}"));
    }
    let secs = started.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    outcome(ok, format!("{}; {secs:.1}s", lines.join("; ")))
}

fn criterion_6() -> Outcome {
    let (mut mp_ari, mut base_ari) = (Vec::new(), Vec::new());
    let (mut mp_time, mut base_time) = (0.0, 0.0);
    for seed in 1..=3u64 {
        let d = generate(&SynthSpec { n_obs: 200, snr: 8.0, seed, ..SynthSpec::no_sparse() }).unwrap();
        let hp = HyperParams { k_final: Some(4), seed, ..HyperParams::default() };
        let started = Instant::now();
        let r = run(&d.matrix, Mode::Mpcc, &hp).unwrap();
        mp_time += started.elapsed().as_secs_f64();
        let started = Instant::now();
        let b = consensus_baseline(&d.matrix, 4, r.iterations_run, 0.8, Metric::Manhattan, seed).unwrap();
        base_time += started.elapsed().as_secs_f64();
        mp_ari.push(ari(&r.labels, &d.labels).unwrap());
        base_ari.push(ari(&b.labels, &d.labels).unwrap());
    }
    let (a, b) = (median(&mp_ari).unwrap(), median(&base_ari).unwrap());
    outcome(
        (a - b).abs() <= 0.05 && mp_time < 0.5 * base_time,
        format!("median ARI mpcc {a:.3} vs baseline {b:.3}; time {mp_time:.3}s vs {base_time:.3}s"),
    )
}

fn criterion_7() -> Outcome {
    let d = separable_blobs(&[40, 40], 20, 10.0, 7).unwrap();
    let hp = HyperParams { k_final: Some(2), seed: 7, ..HyperParams::default() };
    let r = run(&d.matrix, Mode::Impacc, &hp).unwrap();
    let tail: Vec<f64> = r.trace[r.trace.len().saturating_sub(6)..].iter().map(|t| t.confusion_percentile).collect();
    let non_increasing = tail.windows(2).all(|w| w[1] <= w[0] + 1e-5);
    outcome(
        r.stop_reason == StopReason::EarlyStop && r.iterations_run < r.t_max && non_increasing,
        format!(
            "stop {} at {} of {}, final percentiles {:?}",
            r.stop_reason.name(),
            r.iterations_run,
            r.t_max,
            tail
        ),
    )
}

fn timing_engine(data: &DataMatrix, n_frac: f64) -> Engine<'_> {
    let hp = HyperParams {
        k_final: Some(4),
        n_frac,
        m_frac: 0.1,
        t_max: Some(400),
        stop: StopTracker::new(90.0, 0.0, 5),
        ..HyperParams::default()
    };
    Engine::new(data, Mode::Mpcc, &hp).unwrap()
}

fn timed_step(engine: &mut Engine<'_>) -> f64 {
    let started = Instant::now();
    engine.step().unwrap();
    started.elapsed().as_secs_f64()
}

fn criterion_8() -> Outcome {
    let d = generate(&SynthSpec { n_obs: 2000, n_features: 500, n_signal: 10, snr: 6.0, seed: 8, ..SynthSpec::default() })
        .unwrap();
    // Steps of the two sizes alternate so both see the same machine load.
    let mut small = timing_engine(&d.matrix, 0.05);
    let mut large = timing_engine(&d.matrix, 0.2);
    let (mut t_small, mut t_large) = (Vec::new(), Vec::new());
    for step in 0..300 {
        let (a, b) = (timed_step(&mut small), timed_step(&mut large));
        if step >= 50 {
            t_small.push(a);
            t_large.push(b);
        }
    }
    let (t_small, t_large) = (median(&t_small).unwrap(), median(&t_large).unwrap());
    let ratio = t_large / t_small;
    outcome(
        (3.0..=6.0).contains(&ratio),
        format!(
            "n_count {} -> {}: {:.3}ms -> {:.3}ms, ratio {ratio:.2}",
            small.n_count(),
            large.n_count(),
            t_small * 1e3,
            t_large * 1e3
        ),
    )
}

fn cluster_once(input: &Path, out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_mpclust"))
        .args(["cluster", "--mode", "impacc", "--k", "4", "--seed", "7"])
        .arg(input)
        .arg("--out")
        .arg(out)
        .env_clear()
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success());
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = generate(&SynthSpec { n_obs: 200, n_features: 1000, n_signal: 10, snr: 6.0, seed: 9, ..SynthSpec::default() })
        .unwrap();
    let input = dir.path().join("in.csv");
    write_matrix(&input, &d.matrix, LoadOptions::default()).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    cluster_once(&input, &a);
    cluster_once(&input, &b);
    let same = ["labels.csv", "consensus.csv", "feature_scores.csv"]
        .iter()
        .all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap());

    let seq = HyperParams { k_final: Some(4), seed: 7, ..HyperParams::default() };
    let par = HyperParams { parallel: true, ..seq.clone() };
    let rs = run(&d.matrix, Mode::Mpcc, &seq).unwrap();
    let rp = run(&d.matrix, Mode::Mpcc, &par).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let parallel_same = rs.labels == rp.labels
        && bits(rs.consensus.values()) == bits(rp.consensus.values())
        && rs.iterations_run == rp.iterations_run;
    outcome(
        same && parallel_same,
        format!("cli reruns identical: {same}; mpcc parallel == sequential: {parallel_same}"),
    )
}

fn criterion_10() -> Outcome {
    let d = separable_blobs(&[100, 100], 200, 10.0, 10).unwrap();
    let hp = HyperParams { k_final: Some(2), seed: 10, ..HyperParams::default() };
    let grid = [(0.05, 0.1), (0.05, 0.25), (0.1, 0.1), (0.1, 0.25)];
    let r = tune_minipatch_size(&d.matrix, Mode::Mpcc, &hp, &grid).unwrap();
    let cheapest = (0.05, 0.1);
    outcome(
        r.converged && (r.chosen.m_frac, r.chosen.n_frac) == cheapest && r.chosen.max_confusion < 0.01,
        format!(
            "chose ({}, {}) with max confusion {:.2e}",
            r.chosen.m_frac, r.chosen.n_frac, r.chosen.max_confusion
        ),
    )
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    for (id, check) in criteria {
        let o = check();
        println!("criterion {id}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
