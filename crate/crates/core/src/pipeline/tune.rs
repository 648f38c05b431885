//! Choosing the minipatch size: the cheapest `(m, n)` whose run ends with
//! every confusion value below 0.01.

use crate::dataio::DataMatrix;
use crate::error::{Error, Result};

use super::{run, HyperParams, Mode};

const CONFUSION_TARGET: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct TuneCell {
    pub m_frac: f64,
    pub n_frac: f64,
    /// Cost proxy `m_count * n_count^2`.
    pub cost: usize,
    pub max_confusion: f64,
    pub iterations_run: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub chosen: TuneCell,
    /// Every evaluated cell, cheapest first.
    pub cells: Vec<TuneCell>,
    /// False when no cell reached the confusion target; `chosen` is then
    /// the cell with the smallest maximum confusion.
    pub converged: bool,
}

/// Evaluates each `(m_frac, n_frac)` cell, cheapest first, and returns the
/// first one reaching the target.
pub fn tune_minipatch_size(
    data: &DataMatrix,
    mode: Mode,
    hp: &HyperParams,
    grid: &[(f64, f64)],
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("tuning grid is empty".into()));
    }
    let mut cells = Vec::with_capacity(grid.len());
    for &(m_frac, n_frac) in grid {
        let cell_hp = HyperParams { m_frac, n_frac, ..hp.clone() };
        cell_hp.validate()?;
        let n = cell_hp.n_count(data.n_rows())?;
        let m = cell_hp.m_count(data.n_cols());
        cells.push(TuneCell { m_frac, n_frac, cost: m * n * n, max_confusion: f64::NAN, iterations_run: 0 });
    }
    cells.sort_by_key(|c| c.cost);

    let mut evaluated = Vec::with_capacity(cells.len());
    for mut cell in cells {
        let cell_hp = HyperParams { m_frac: cell.m_frac, n_frac: cell.n_frac, ..hp.clone() };
        let result = run(data, mode, &cell_hp)?;
        cell.max_confusion = result.max_confusion();
        cell.iterations_run = result.iterations_run;
        let done = cell.max_confusion < CONFUSION_TARGET;
        evaluated.push(cell);
        if done {
            let chosen = evaluated.last().cloned().expect("just pushed");
            return Ok(TuneResult { chosen, cells: evaluated, converged: true });
        }
    }
    let chosen = evaluated
        .iter()
        .min_by(|a, b| a.max_confusion.total_cmp(&b.max_confusion))
        .cloned()
        .expect("grid is nonempty");
    Ok(TuneResult { chosen, cells: evaluated, converged: false })
}
