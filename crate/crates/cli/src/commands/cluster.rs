use std::io::Write;
use std::time::Instant;

use anyhow::{Context, Result};
use mpclust_core::consensus::{write_binary, write_csv};
use mpclust_core::pipeline::{Engine, Mode};
use serde_json::json;

use super::load_input;
use crate::args::ClusterArgs;
use crate::config::resolve;
use crate::output::{create, sha256_file, write_labels, write_scores, write_trace};

pub fn run(a: &ClusterArgs) -> Result<()> {
    let resolved = resolve(&a.hp, Mode::Impacc)?;
    let (mode, hp) = (resolved.mode, &resolved.hp);

    let started = Instant::now();
    let data = load_input(&a.input)?;
    let digest = sha256_file(&a.input.input)?;
    let t_load = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let mut engine = Engine::new(&data, mode, hp)?;
    let mut weight_rows = Vec::new();
    if a.weight_trace {
        loop {
            let done = engine.step()?;
            let t = engine.iteration();
            weight_rows.push(("observation", t, engine.observation_sampler().weights().to_vec()));
            if mode.adaptive_features() {
                weight_rows.push(("feature", t, engine.feature_sampler().importance()));
            }
            if done {
                break;
            }
        }
    } else {
        engine.run_loop()?;
    }
    let t_ensemble = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let result = engine.finish()?;
    let t_finalize = started.elapsed().as_secs_f64();

    let started = Instant::now();
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut f = create(&a.out.join("labels.csv"))?;
    write_labels(&mut f, data.row_ids(), &result.labels)?;
    f.flush()?;

    let consensus_file = if a.consensus_format == "binary" { "consensus.bin" } else { "consensus.csv" };
    let mut f = create(&a.out.join(consensus_file))?;
    if a.consensus_format == "binary" {
        write_binary(&mut f, &result.consensus)?;
    } else {
        write_csv(&mut f, &result.consensus, data.row_ids())?;
    }
    f.flush()?;

    if let Some(scores) = &result.feature_scores {
        let mut f = create(&a.out.join("feature_scores.csv"))?;
        write_scores(&mut f, data.col_ids(), scores)?;
        f.flush()?;
    }

    let mut f = create(&a.out.join("trace.csv"))?;
    write_trace(&mut f, &result.trace)?;
    f.flush()?;

    if a.weight_trace {
        let mut f = create(&a.out.join("weights_trace.csv"))?;
        writeln!(f, "axis,iteration,index,value")?;
        for (axis, t, values) in &weight_rows {
            for (i, v) in values.iter().enumerate() {
                writeln!(f, "{axis},{t},{i},{v}")?;
            }
        }
        f.flush()?;
    }
    let t_write = started.elapsed().as_secs_f64();

    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "input": {
            "path": a.input.input.display().to_string(),
            "sha256": digest,
            "rows": data.n_rows(),
            "cols": data.n_cols(),
            "transpose": a.input.transpose,
            "log2": a.input.log2,
        },
        "config": resolved.to_json(),
        "seed": hp.seed,
        "n_count": result.n_count,
        "m_count": result.m_count,
        "t_max": result.t_max,
        "iterations_run": result.iterations_run,
        "stop_reason": result.stop_reason.name(),
        "clusters": mpclust_core::hclust::n_clusters(&result.labels),
        "timings_seconds": {
            "load": t_load,
            "ensemble": t_ensemble,
            "finalize": t_finalize,
            "write": t_write,
        },
    });
    let mut f = create(&a.out.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    writeln!(f)?;
    f.flush()?;

    eprintln!(
        "{}: {} clusters after {} iterations ({}), outputs in {}",
        mode.name(),
        mpclust_core::hclust::n_clusters(&result.labels),
        result.iterations_run,
        result.stop_reason.name(),
        a.out.display()
    );
    Ok(())
}
