use mvnn_core::bundle::all_bundles;
use mvnn_core::prefgen::{optimal_allocation, random_domain, DomainSpec};
use mvnn_core::{Allocation, MvnnParams, ValueOracle};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliResult, Context};
use crate::io::OutDir;

#[derive(Clone, Debug, Serialize)]
pub struct Optimum {
    pub welfare: f64,
    pub allocation: Allocation,
}

#[derive(Clone, Debug)]
pub struct GenOutcome {
    pub networks: Vec<MvnnParams>,
    pub optimum: Option<Optimum>,
}

/// Samples one value network per bidder, and optionally the efficient allocation.
pub fn run(cfg: &RunConfig) -> CliResult<GenOutcome> {
    let spec = &cfg.gen.domain;
    let networks = random_domain(spec).context(|| "gen.domain".into())?;
    let optimum = if cfg.gen.optimum {
        let (welfare, allocation) =
            optimal_allocation(spec, &networks).context(|| "computing the efficient allocation".into())?;
        Some(Optimum { welfare, allocation })
    } else {
        None
    };
    Ok(GenOutcome { networks, optimum })
}

/// A description of the sampling distribution, recorded with the outputs.
pub fn generator_note(d: &DomainSpec) -> String {
    format!(
        "weights ~ U[0, {} / fan_in], hidden biases ~ U[{}, {}], readout scaled by {}, cutoff {}, stream (seed, domain, bidder)",
        d.weight_scale, d.bias_range.0, d.bias_range.1, d.value_scale, d.cutoff
    )
}

pub fn write(cfg: &RunConfig, outcome: &GenOutcome, out: &OutDir) -> CliResult<()> {
    for (i, n) in outcome.networks.iter().enumerate() {
        out.write_json(&format!("models/bidder{i}.json"), n)?;
    }
    let m = cfg.gen.domain.items;
    if m <= cfg.gen.table_items {
        let mut header = vec!["bundle_bits".to_string()];
        header.extend((0..outcome.networks.len()).map(|i| format!("bidder{i}")));
        let rows: Vec<Vec<String>> = all_bundles(m)
            .map(|b| {
                let mut row = vec![b.to_string()];
                row.extend(outcome.networks.iter().map(|n| format!("{}", n.value(&b))));
                row
            })
            .collect();
        out.write_records("values.csv", &header, &rows)?;
    }
    if let Some(o) = &outcome.optimum {
        out.write_json("optimum.json", o)?;
    }
    out.write_json("domain.json", &cfg.gen.domain)?;
    Ok(())
}
