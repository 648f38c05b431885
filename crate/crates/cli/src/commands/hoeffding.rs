use std::io::Write;

use anyhow::{Context, Result};
use mpclust_core::dataio::{load_matrix, LoadOptions};
use mpclust_core::dist::{deviation_experiment, Metric};
use mpclust_core::synthgen::{generate, Regime, SynthSpec};

use crate::args::HoeffdingArgs;
use crate::output::sink;
use crate::usage;

pub fn run(a: &HoeffdingArgs) -> Result<()> {
    if a.m_feat.is_empty() || a.eps.is_empty() {
        return Err(usage("--m and --eps need at least one value each"));
    }
    let metric: Metric = a.metric.parse().map_err(|e| usage(format!("{e}")))?;
    let data = match &a.input {
        Some(p) => load_matrix(p, LoadOptions::for_path(p)).with_context(|| format!("loading {}", p.display()))?,
        None => {
            let spec = SynthSpec {
                n_obs: a.n_obs,
                n_features: a.n_features,
                n_clusters: 1,
                cluster_sizes: None,
                n_signal: 1,
                snr: 0.0,
                rho: 0.0,
                regime: Regime::Sparse,
                seed: a.seed,
            };
            generate(&spec).map_err(|e| usage(e.to_string()))?.matrix
        }
    };
    let mut reports = Vec::with_capacity(a.m_feat.len());
    for &m in &a.m_feat {
        let r = deviation_experiment(&data, metric, m, a.trials, &a.eps, a.seed).map_err(|e| match e {
            mpclust_core::Error::InvalidParameter(msg) => usage(msg),
            other => other.into(),
        })?;
        reports.push(r);
    }
    let mut out = sink(a.out.as_deref())?;
    writeln!(out, "m,eps,empirical,bound,trials")?;
    for r in &reports {
        for row in &r.rows {
            writeln!(out, "{},{},{},{},{}", r.m_feat, row.eps, row.exceedance, row.bound, r.trials)?;
        }
    }
    out.flush()?;
    Ok(())
}
