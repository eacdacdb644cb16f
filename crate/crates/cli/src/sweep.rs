//! One-parameter sweeps: `--vary model.sigma=0.1:0.4:7` re-runs `price` with
//! the dotted key set to each of `n` evenly spaced values.

use std::fmt::Write as _;
use std::str::FromStr;

use passport_core::solve;
use rayon::prelude::*;
use toml::Value;

use crate::commands::price_records;
use crate::config::RunConfig;
use crate::{CliError, Output};

#[derive(Debug, Clone, PartialEq)]
pub struct Vary {
    pub key: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for Vary {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("--vary expects key=lo:hi:n, got `{s}`"));
        let (key, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(bad());
        };
        let vary = Vary {
            key: key.trim().to_string(),
            lo: lo.trim().parse().map_err(|_| bad())?,
            hi: hi.trim().parse().map_err(|_| bad())?,
            n: n.trim().parse().map_err(|_| bad())?,
        };
        if vary.key.is_empty() || vary.n == 0 || !vary.lo.is_finite() || !vary.hi.is_finite() {
            return Err(bad());
        }
        Ok(vary)
    }
}

impl Vary {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|k| if k + 1 == self.n { self.hi } else { self.lo + k as f64 * step })
            .collect()
    }
}

/// Sets a dotted key, creating intermediate tables. Integer-valued keys stay
/// integers so that grid sizes can be swept.
fn set_path(root: &mut Value, key: &str, value: f64) -> Result<(), CliError> {
    let mut parts = key.split('.').peekable();
    let mut node = root;
    while let Some(part) = parts.next() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("`{key}` does not name a table entry")))?;
        if parts.peek().is_none() {
            let new = match table.get(part) {
                Some(Value::Integer(_)) => {
                    if value.fract() != 0.0 {
                        return Err(CliError::Config(format!("`{key}` takes integers, got {value}")));
                    }
                    Value::Integer(value as i64)
                }
                _ => Value::Float(value),
            };
            table.insert(part.to_string(), new);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Default::default()));
    }
    Err(CliError::Config(format!("empty key in `{key}`")))
}

pub fn sweep(config_text: &str, vary: &Vary, seed: Option<u64>) -> Result<Output, CliError> {
    let base: Value = toml::from_str(config_text).map_err(|e| CliError::Config(e.to_string()))?;
    let values = vary.values();
    let prepared = values
        .iter()
        .map(|&v| {
            let mut doc = base.clone();
            set_path(&mut doc, &vary.key, v)?;
            let mut cfg: RunConfig = doc.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
            if let Some(s) = seed {
                cfg.mc.seed = s;
            }
            cfg.prepare()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows = prepared
        .par_iter()
        .map(|prep| {
            let solution = solve(&prep.model, &prep.grid, &prep.solver)?;
            price_records(prep, &solution)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut body = String::new();
    let _ = writeln!(body, "{},t,S,X,u,V", vary.key);
    for (v, records) in values.iter().zip(rows) {
        for r in records {
            let _ = writeln!(
                body,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                v, r.t, r.spot, r.account, r.u, r.value
            );
        }
    }
    Ok(Output {
        file_name: "sweep.csv",
        body: body.into_bytes(),
        failed: false,
    })
}
