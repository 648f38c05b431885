//! Layered run configuration: flags, then `MPCLUST_*` variables (both
//! via clap), then a config file, then defaults.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use mpclust_core::consensus::StopTracker;
use mpclust_core::pipeline::{FinalAlgo, HyperParams, Mode};
use serde_json::Value;

use crate::args::HpArgs;
use crate::usage;

/// Raw `key -> value` pairs from a config file, keys normalised.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile(BTreeMap<String, String>);

const KEYS: &[&str] = &[
    "mode", "k_final", "final_algo", "seed", "m_frac", "n_frac", "h", "eta", "alpha_F", "tau", "alpha_I",
    "theta", "epochs_E", "t_max", "metric", "stop_q", "stop_tol", "stop_patience", "parallel",
];

fn canonical_key(raw: &str) -> Option<&'static str> {
    let k = raw.trim().replace('-', "_").to_ascii_lowercase();
    let k = match k.as_str() {
        "k" => "k_final",
        "final" => "final_algo",
        "epochs" => "epochs_e",
        other => return KEYS.iter().copied().find(|c| c.to_ascii_lowercase() == other),
    };
    KEYS.iter().copied().find(|c| c.to_ascii_lowercase() == k)
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }

    /// Flat `key = value` lines (`#` starts a comment), or the JSON manifest
    /// written by `cluster`, whose `config` object is used.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut map = BTreeMap::new();
        let mut put = |key: &str, value: String| -> std::result::Result<(), String> {
            let k = canonical_key(key).ok_or_else(|| format!("unknown key '{key}'"))?;
            map.insert(k.to_owned(), value);
            Ok(())
        };
        if text.trim_start().starts_with('{') {
            let json: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
            let obj = json.get("config").unwrap_or(&json);
            let obj = obj.as_object().ok_or("expected a JSON object")?;
            for (k, v) in obj {
                let value = match v {
                    Value::String(s) => s.clone(),
                    Value::Null => continue,
                    other => other.to_string(),
                };
                put(k, value)?;
            }
        } else {
            for (n, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
                put(k, v.trim().to_owned())?;
            }
        }
        Ok(Self(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("config value for {key} is invalid: '{v}'"))),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub mode: Mode,
    pub hp: HyperParams,
}

impl Resolved {
    /// Snapshot with canonical keys, readable back by [`ConfigFile::parse`].
    pub fn to_json(&self) -> Value {
        let hp = &self.hp;
        let k = hp.k_final.map_or(Value::from("auto"), Value::from);
        let final_algo = match hp.final_algo {
            FinalAlgo::Hierarchical => "hierarchical",
            FinalAlgo::Spectral => "spectral",
        };
        let metric = match hp.metric {
            mpclust_core::dist::Metric::Manhattan => "manhattan",
            mpclust_core::dist::Metric::SqEuclidean => "sq_euclidean",
        };
        serde_json::json!({
            "mode": self.mode.name(),
            "k_final": k,
            "final_algo": final_algo,
            "seed": hp.seed,
            "m_frac": hp.m_frac,
            "n_frac": hp.n_frac,
            "h": hp.h,
            "eta": hp.eta,
            "alpha_F": hp.alpha_f,
            "tau": hp.tau,
            "alpha_I": hp.alpha_i,
            "theta": hp.theta,
            "epochs_E": hp.epochs,
            "t_max": hp.t_max,
            "metric": metric,
            "stop_q": hp.stop.q,
            "stop_tol": hp.stop.tolerance,
            "stop_patience": hp.stop.patience,
            "parallel": hp.parallel,
        })
    }
}

fn parse_with<T>(value: &str, key: &str, f: impl Fn(&str) -> mpclust_core::Result<T>) -> Result<T> {
    f(value).map_err(|e| usage(format!("{key}: {e}")))
}

/// Merges flags (already layered over the environment by clap) with the
/// config file and defaults.
pub fn resolve(args: &HpArgs, default_mode: Mode) -> Result<Resolved> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let d = HyperParams::default();

    let mode = match args.mode.as_deref().or(file.raw("mode")) {
        Some(m) => parse_with(m, "mode", str::parse)?,
        None => default_mode,
    };
    let k_final = match args.k.as_deref().or(file.raw("k_final")) {
        None | Some("auto") => None,
        Some(k) => Some(
            k.parse::<usize>()
                .map_err(|_| usage(format!("k must be a positive integer or 'auto', got '{k}'")))?,
        ),
    };
    let final_algo = match args.final_algo.as_deref().or(file.raw("final_algo")) {
        None | Some("auto") => FinalAlgo::Hierarchical,
        Some(f) => parse_with(f, "final_algo", str::parse)?,
    };
    let metric = match args.metric.as_deref().or(file.raw("metric")) {
        None => d.metric,
        Some(m) => parse_with(m, "metric", str::parse)?,
    };

    macro_rules! pick {
        ($field:ident, $key:literal, $default:expr) => {
            match args.$field {
                Some(v) => v,
                None => file.get($key)?.unwrap_or($default),
            }
        };
    }
    let stop = StopTracker::new(
        pick!(stop_q, "stop_q", d.stop.q),
        pick!(stop_tol, "stop_tol", d.stop.tolerance),
        pick!(stop_patience, "stop_patience", d.stop.patience),
    );
    let t_max = match args.t_max {
        Some(t) => Some(t),
        None => file.get("t_max")?,
    };
    let hp = HyperParams {
        m_frac: pick!(m_frac, "m_frac", d.m_frac),
        n_frac: pick!(n_frac, "n_frac", d.n_frac),
        h: pick!(h, "h", d.h),
        eta: pick!(eta, "eta", d.eta),
        alpha_f: pick!(alpha_f, "alpha_F", d.alpha_f),
        tau: pick!(tau, "tau", d.tau),
        alpha_i: pick!(alpha_i, "alpha_I", d.alpha_i),
        theta: pick!(theta, "theta", d.theta),
        epochs: pick!(epochs, "epochs_E", d.epochs),
        t_max,
        k_final,
        final_algo,
        metric,
        stop,
        seed: pick!(seed, "seed", d.seed),
        parallel: pick!(parallel, "parallel", d.parallel),
        keep_log: false,
    };
    hp.validate().map_err(|e| usage(e.to_string()))?;
    Ok(Resolved { mode, hp })
}
