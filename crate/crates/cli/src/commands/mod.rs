pub mod benchmark;
pub mod cluster;
pub mod eval;
pub mod hoeffding;
pub mod simulate;
pub mod tune;

use anyhow::{Context, Result};
use mpclust_core::dataio::{load_matrix, log2_plus_one, LoadOptions};
use mpclust_core::DataMatrix;

use crate::args::InputArgs;
use crate::usage;

pub fn load_input(a: &InputArgs) -> Result<DataMatrix> {
    let mut opts = LoadOptions::for_path(&a.input);
    if let Some(d) = a.delimiter {
        if !d.is_ascii() {
            return Err(usage(format!("delimiter must be a single ASCII character, got {d:?}")));
        }
        opts.delimiter = d as u8;
    }
    opts.header = !a.no_header;
    opts.row_ids = !a.no_row_ids;
    opts.transpose = a.transpose;
    let m = load_matrix(&a.input, opts).with_context(|| format!("loading {}", a.input.display()))?;
    if a.log2 {
        Ok(log2_plus_one(&m)?)
    } else {
        Ok(m)
    }
}
