//! Artifact writers and small table readers shared by the subcommands.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use mpclust_core::pipeline::TraceRow;
use sha2::{Digest, Sha256};

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Writes to `path`, or to stdout when it is `None`.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// `id,label` with labels shifted to start at 1.
pub fn write_labels(out: &mut impl Write, ids: &[String], labels: &[usize]) -> Result<()> {
    writeln!(out, "id,label")?;
    for (id, l) in ids.iter().zip(labels) {
        writeln!(out, "{id},{}", l + 1)?;
    }
    Ok(())
}

pub fn write_scores(out: &mut impl Write, ids: &[String], scores: &[f64]) -> Result<()> {
    writeln!(out, "feature,score")?;
    for (id, s) in ids.iter().zip(scores) {
        writeln!(out, "{id},{s}")?;
    }
    Ok(())
}

pub fn write_trace(out: &mut impl Write, trace: &[TraceRow]) -> Result<()> {
    writeln!(out, "iteration,confusion_percentile,minipatch_clusters,high_obs,high_features,counted")?;
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iteration, r.confusion_percentile, r.minipatch_clusters, r.high_obs, r.high_features, r.counted
        )?;
    }
    Ok(())
}

/// Reads the last column of a CSV with a header row.
pub fn read_last_column(path: &Path) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: row {}", path.display(), i + 2))?;
        match record.iter().next_back() {
            Some(v) => out.push(v.to_owned()),
            None => bail!("{}: row {} is empty", path.display(), i + 2),
        }
    }
    Ok(out)
}

/// Maps arbitrary label strings to dense ids in order of first appearance.
pub fn dense_labels(raw: &[String]) -> Vec<usize> {
    let mut seen: Vec<&str> = Vec::new();
    raw.iter()
        .map(|r| match seen.iter().position(|s| *s == r.as_str()) {
            Some(i) => i,
            None => {
                seen.push(r);
                seen.len() - 1
            }
        })
        .collect()
}

pub fn parse_bool(raw: &str) -> Option<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}
