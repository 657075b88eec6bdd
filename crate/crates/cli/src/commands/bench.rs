use mvnn_core::prefgen::{random_domain, DomainSpec};
use mvnn_core::solver::{runtime_compare, BenchInstance, BenchReport};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context};
use crate::io::OutDir;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub architecture: String,
    /// Mean MVNN-encoding time over mean ReLU-encoding time.
    pub mvnn_over_relu: Option<f64>,
}

pub fn label(items: usize, hidden: &[usize]) -> String {
    let mut parts = vec![items.to_string()];
    parts.extend(hidden.iter().map(usize::to_string));
    parts.push("1".into());
    parts.join("-")
}

/// Random winner-determination instances, `instances` per architecture.
pub fn instances(cfg: &RunConfig) -> CliResult<Vec<BenchInstance>> {
    let s = &cfg.bench;
    if s.architectures.is_empty() || s.instances == 0 {
        return Err(CliError::Usage("bench needs architectures and at least one instance".into()));
    }
    let mut out = Vec::new();
    for hidden in &s.architectures {
        for k in 0..s.instances as u64 {
            let spec = DomainSpec::new(s.bidders, s.items, hidden, s.cutoff, cfg.seed + k);
            let networks = random_domain(&spec).context(|| format!("bench architecture {hidden:?}"))?;
            out.push(BenchInstance {
                architecture: label(s.items, hidden),
                items: s.items,
                networks,
            });
        }
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig) -> CliResult<BenchReport> {
    cfg.bench.solve.validate().context(|| "bench.solve".into())?;
    let inst = instances(cfg)?;
    runtime_compare(&inst, &cfg.bench.solve).context(|| "runtime comparison".into())
}

pub fn ratios(report: &BenchReport) -> Vec<RatioRow> {
    report
        .architectures()
        .into_iter()
        .map(|a| RatioRow {
            mvnn_over_relu: report.ratio(&a),
            architecture: a,
        })
        .collect()
}

pub fn write(report: &BenchReport, out: &OutDir) -> CliResult<()> {
    out.write_csv("bench.csv", &report.rows)?;
    out.write_csv("records.csv", &report.records)?;
    out.write_csv("ratios.csv", &ratios(report))?;
    Ok(())
}
