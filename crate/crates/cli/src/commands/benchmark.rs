use std::io::Write;
use std::time::Instant;

use anyhow::Result;
use mpclust_core::metrics::{ari, f1_features, select_by_score, select_top_k};
use mpclust_core::pipeline::{consensus_baseline, plain_hierarchical, run as run_pipeline, HyperParams, Mode};
use rayon::prelude::*;

use super::simulate::{spec_from, synthesize};
use crate::args::BenchmarkArgs;
use crate::config::resolve;
use crate::output::sink;
use crate::usage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Method {
    Mpcc,
    Mpacc,
    Impacc,
    Hierarchical,
    Consensus,
}

impl Method {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "mpcc" => Method::Mpcc,
            "mpacc" => Method::Mpacc,
            "impacc" => Method::Impacc,
            "hierarchical" | "hclust" => Method::Hierarchical,
            "consensus" => Method::Consensus,
            other => return Err(usage(format!("unknown benchmark method '{other}'"))),
        })
    }

    fn name(self) -> &'static str {
        match self {
            Method::Mpcc => "mpcc",
            Method::Mpacc => "mpacc",
            Method::Impacc => "impacc",
            Method::Hierarchical => "hierarchical",
            Method::Consensus => "consensus",
        }
    }
}

struct Row {
    method: Method,
    snr: f64,
    seed: u64,
    ari: f64,
    f1: Option<f64>,
    seconds: f64,
}

pub fn run(a: &BenchmarkArgs) -> Result<()> {
    if a.snrs.is_empty() {
        return Err(usage("--snrs needs at least one value"));
    }
    let methods = a.methods.iter().map(|m| Method::parse(m)).collect::<Result<Vec<_>>>()?;
    if methods.is_empty() {
        return Err(usage("--methods needs at least one value"));
    }
    let seeds: Vec<u64> = match &a.seeds {
        Some(s) if !s.is_empty() => s.clone(),
        Some(_) => return Err(usage("--seeds needs at least one value")),
        None => (0..a.reps).map(|r| a.base_seed + r).collect(),
    };
    let base = resolve(&a.hp, Mode::Impacc)?.hp;
    // Validate the data shape once so bad sizes are usage errors, not worker failures.
    spec_from(&a.synth, a.snrs[0], seeds[0], true)?;

    let cells: Vec<(f64, u64)> = a.snrs.iter().flat_map(|&snr| seeds.iter().map(move |&s| (snr, s))).collect();
    let per_cell: Vec<Vec<Row>> = cells
        .par_iter()
        .map(|&(snr, seed)| -> Result<Vec<Row>> {
            let spec = spec_from(&a.synth, snr, seed, true)?;
            let data = synthesize(&spec)?;
            let k = base.k_final.unwrap_or(spec.n_clusters);
            let hp = HyperParams { k_final: Some(k), seed, ..base.clone() };
            let mut rows = Vec::with_capacity(methods.len());
            for &method in &methods {
                let started = Instant::now();
                let (labels, f1) = match method {
                    Method::Mpcc | Method::Mpacc | Method::Impacc => {
                        let mode = match method {
                            Method::Mpcc => Mode::Mpcc,
                            Method::Mpacc => Mode::Mpacc,
                            _ => Mode::Impacc,
                        };
                        let r = run_pipeline(&data.matrix, mode, &hp)?;
                        let f1 = match &r.feature_scores {
                            Some(scores) => {
                                let selected = match a.top_k {
                                    Some(k) => select_top_k(scores, k),
                                    None => select_by_score(scores),
                                };
                                Some(f1_features(&selected, &data.signal_mask)?)
                            }
                            None => None,
                        };
                        (r.labels, f1)
                    }
                    Method::Hierarchical => (plain_hierarchical(&data.matrix, k, hp.metric)?, None),
                    Method::Consensus => {
                        let r = consensus_baseline(&data.matrix, k, a.consensus_iterations, 0.8, hp.metric, seed)?;
                        (r.labels, None)
                    }
                };
                let seconds = started.elapsed().as_secs_f64();
                rows.push(Row { method, snr, seed, ari: ari(&labels, &data.labels)?, f1, seconds });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<Row> = per_cell.into_iter().flatten().collect();
    rows.sort_by(|x, y| {
        x.method
            .cmp(&y.method)
            .then(x.snr.total_cmp(&y.snr))
            .then(x.seed.cmp(&y.seed))
    });

    let mut out = sink(a.out.as_deref())?;
    writeln!(out, "method,snr,seed,ari,f1,seconds")?;
    for r in &rows {
        let f1 = r.f1.map(|v| v.to_string()).unwrap_or_default();
        let secs = if a.no_timings { String::new() } else { format!("{:.6}", r.seconds) };
        writeln!(out, "{},{},{},{},{},{}", r.method.name(), r.snr, r.seed, r.ari, f1, secs)?;
    }
    out.flush()?;
    Ok(())
}
