use std::io::Write;

use anyhow::{Context, Result};
use mpclust_core::dataio::{write_matrix, LoadOptions};
use mpclust_core::synthgen::{generate, Regime, SynthData, SynthSpec};

use crate::args::{SimulateArgs, SynthArgs};
use crate::output::create;
use crate::usage;

/// Builds a generator spec; `desk` selects the smaller benchmark defaults.
pub fn spec_from(a: &SynthArgs, snr: f64, seed: u64, desk: bool) -> Result<SynthSpec> {
    let regime: Regime = a.regime.parse().map_err(|e| usage(format!("{e}")))?;
    let base = if regime == Regime::NoSparse { SynthSpec::no_sparse() } else { SynthSpec::default() };
    let (n_obs, n_features, n_signal) = if desk {
        let m = if regime == Regime::NoSparse { 100 } else { 1000 };
        (200, m, if regime == Regime::NoSparse { m } else { 10 })
    } else {
        (base.n_obs, base.n_features, base.n_signal)
    };
    let n_features = a.n_features.unwrap_or(n_features);
    Ok(SynthSpec {
        n_obs: a.n_obs.unwrap_or(n_obs),
        n_features,
        n_clusters: a.n_clusters,
        cluster_sizes: a.sizes.clone(),
        n_signal: a.n_signal.unwrap_or(if regime == Regime::NoSparse { n_features } else { n_signal }),
        snr,
        rho: a.rho,
        regime,
        seed,
    })
}

pub fn synthesize(spec: &SynthSpec) -> Result<SynthData> {
    generate(spec).map_err(|e| match e {
        mpclust_core::Error::InvalidParameter(msg) => usage(msg),
        other => other.into(),
    })
}

pub fn run(a: &SimulateArgs) -> Result<()> {
    let spec = spec_from(&a.synth, a.snr, a.seed, false)?;
    let data = synthesize(&spec)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_matrix(a.out.join("matrix.csv"), &data.matrix, LoadOptions::default())?;

    let mut f = create(&a.out.join("labels.csv"))?;
    writeln!(f, "id,label")?;
    for (id, l) in data.matrix.row_ids().iter().zip(&data.labels) {
        writeln!(f, "{id},{l}")?;
    }
    f.flush()?;

    let mut f = create(&a.out.join("mask.csv"))?;
    writeln!(f, "feature,signal")?;
    for (id, &s) in data.matrix.col_ids().iter().zip(&data.signal_mask) {
        writeln!(f, "{id},{}", u8::from(s))?;
    }
    f.flush()?;
    eprintln!(
        "wrote {} x {} matrix to {}",
        data.matrix.n_rows(),
        data.matrix.n_cols(),
        a.out.display()
    );
    Ok(())
}
