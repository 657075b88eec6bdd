use mvnn_core::construct::{exact_mvnn, interpolate, ValueTable};
use mvnn_core::{Bundle, MvnnParams, ValueOracle};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context};
use crate::io::{read_dataset, read_json, OutDir};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub bundle_bits: String,
    pub target: f64,
    pub prediction: f64,
    pub abs_error: f64,
}

#[derive(Clone, Debug)]
pub struct ConstructOutcome {
    pub model: MvnnParams,
    pub rows: Vec<FitRow>,
    pub max_error: f64,
}

/// Builds the exact network for a value table, or the interpolating one for a dataset.
pub fn run(cfg: &RunConfig) -> CliResult<ConstructOutcome> {
    let s = &cfg.construct;
    let (model, points): (MvnnParams, Vec<(Bundle, f64)>) = match (&s.table, &s.data) {
        (Some(path), None) => {
            let table: ValueTable = read_json(path)?;
            let model = exact_mvnn(&table).context(|| format!("constructing from {}", path.display()))?;
            let points = (0..table.values().len())
                .map(|k| (Bundle::from_index(table.items(), k as u64), table.get(k)))
                .collect();
            (model, points)
        }
        (None, Some(path)) => {
            let data = read_dataset(path)?;
            let model = interpolate(&data).context(|| format!("interpolating {}", path.display()))?;
            (model, data)
        }
        _ => {
            return Err(CliError::Usage(
                "construct needs exactly one of `construct.table` and `construct.data`".into(),
            ))
        }
    };
    let rows: Vec<FitRow> = points
        .iter()
        .map(|(b, v)| {
            let p = model.value(b);
            FitRow {
                bundle_bits: b.to_string(),
                target: *v,
                prediction: p,
                abs_error: (p - v).abs(),
            }
        })
        .collect();
    let max_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    Ok(ConstructOutcome { model, rows, max_error })
}

pub fn write(outcome: &ConstructOutcome, out: &OutDir) -> CliResult<()> {
    out.write_json("model.json", &outcome.model)?;
    out.write_csv("fit.csv", &outcome.rows)?;
    Ok(())
}
