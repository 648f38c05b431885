use anyhow::{bail, Result};
use mpclust_core::metrics::{ari, f1_features, select_by_score, select_top_k};

use crate::args::EvalArgs;
use crate::output::{dense_labels, parse_bool, read_last_column};
use crate::usage;

pub fn run(a: &EvalArgs) -> Result<()> {
    let mut any = false;
    if let (Some(truth), Some(pred)) = (&a.truth, &a.pred) {
        let t = dense_labels(&read_last_column(truth)?);
        let p = dense_labels(&read_last_column(pred)?);
        if t.len() != p.len() {
            bail!("truth has {} labels, prediction has {}", t.len(), p.len());
        }
        println!("ari,{}", ari(&t, &p)?);
        any = true;
    }
    if let (Some(scores), Some(mask)) = (&a.scores, &a.mask) {
        let scores: Vec<f64> = read_last_column(scores)?
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| anyhow::anyhow!("bad score '{s}'")))
            .collect::<Result<_>>()?;
        let mask: Vec<bool> = read_last_column(mask)?
            .iter()
            .map(|s| parse_bool(s).ok_or_else(|| anyhow::anyhow!("bad mask value '{s}'")))
            .collect::<Result<_>>()?;
        if scores.len() != mask.len() {
            bail!("{} scores but {} mask entries", scores.len(), mask.len());
        }
        let selected = match a.top_k {
            Some(k) => select_top_k(&scores, k),
            None => select_by_score(&scores),
        };
        println!("f1,{}", f1_features(&selected, &mask)?);
        any = true;
    }
    if !any {
        return Err(usage("give --truth/--pred, --scores/--mask, or both"));
    }
    Ok(())
}
