use std::io::Write;

use anyhow::Result;
use mpclust_core::pipeline::{tune_minipatch_size, Mode};

use super::load_input;
use crate::args::TuneArgs;
use crate::config::resolve;
use crate::output::sink;
use crate::usage;

pub fn run(a: &TuneArgs) -> Result<()> {
    if a.grid_m.is_empty() || a.grid_n.is_empty() {
        return Err(usage("tuning grids need at least one value each"));
    }
    let resolved = resolve(&a.hp, Mode::Impacc)?;
    let grid: Vec<(f64, f64)> = a
        .grid_m
        .iter()
        .flat_map(|&m| a.grid_n.iter().map(move |&n| (m, n)))
        .collect();
    for &(m, n) in &grid {
        if !(m > 0.0 && m <= 1.0 && n > 0.0 && n <= 1.0) {
            return Err(usage(format!("grid fractions must lie in (0, 1], got ({m}, {n})")));
        }
    }
    let data = load_input(&a.input)?;
    let result = tune_minipatch_size(&data, resolved.mode, &resolved.hp, &grid)?;

    let mut out = sink(a.out.as_deref())?;
    writeln!(out, "m_frac,n_frac,cost,max_confusion,iterations_run,chosen")?;
    for c in &result.cells {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.m_frac,
            c.n_frac,
            c.cost,
            c.max_confusion,
            c.iterations_run,
            u8::from(c == &result.chosen)
        )?;
    }
    out.flush()?;
    if result.converged {
        eprintln!(
            "chosen m_frac = {}, n_frac = {} (max confusion {:.3e})",
            result.chosen.m_frac, result.chosen.n_frac, result.chosen.max_confusion
        );
    } else {
        eprintln!(
            "warning: no grid cell reached max confusion < 0.01; best cell m_frac = {}, n_frac = {} ({:.4})",
            result.chosen.m_frac, result.chosen.n_frac, result.chosen.max_confusion
        );
    }
    Ok(())
}
