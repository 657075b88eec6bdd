use serde::{Deserialize, Serialize};

use super::{solve_milp, SolveConfig, Status};
use crate::error::Result;
use crate::milp::{encode_relu_wdp, encode_wdp, EncodeOptions};
use crate::mvnn::MvnnParams;
use crate::stats::mean_ci95;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    /// The bounded-ReLU encoding with interval-arithmetic constants and pruning.
    Mvnn,
    /// The plain big-M ReLU encoding with magnitude-based constants.
    Relu,
}

/// One winner-determination instance: a network per bidder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchInstance {
    /// Label used to group instances, e.g. `"10-8-8-1"`.
    pub architecture: String,
    pub items: usize,
    pub networks: Vec<MvnnParams>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub architecture: String,
    pub instance: usize,
    pub encoding: Encoding,
    pub seconds: f64,
    pub status: Status,
    pub objective: f64,
    pub nodes: u64,
}

/// Per architecture and encoding: mean wall time, 95% CI half-width and timeout count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub architecture: String,
    pub encoding: Encoding,
    pub mean_s: f64,
    pub ci95_s: f64,
    pub timeouts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Mean MVNN time divided by mean ReLU time for one architecture.
    pub fn ratio(&self, architecture: &str) -> Option<f64> {
        let mean = |e: Encoding| {
            self.rows
                .iter()
                .find(|r| r.architecture == architecture && r.encoding == e)
                .map(|r| r.mean_s)
        };
        let (m, r) = (mean(Encoding::Mvnn)?, mean(Encoding::Relu)?);
        (r > 0.0).then(|| m / r)
    }

    /// Architectures in first-seen order.
    pub fn architectures(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.architecture) {
                out.push(r.architecture.clone());
            }
        }
        out
    }
}

/// Solves every instance with both encodings and tabulates wall times.
pub fn runtime_compare(instances: &[BenchInstance], cfg: &SolveConfig) -> Result<BenchReport> {
    let mut records = Vec::with_capacity(2 * instances.len());
    for (idx, inst) in instances.iter().enumerate() {
        for encoding in [Encoding::Mvnn, Encoding::Relu] {
            let model = match encoding {
                Encoding::Mvnn => encode_wdp(&inst.networks, inst.items, EncodeOptions::default())?,
                Encoding::Relu => encode_relu_wdp(&inst.networks, inst.items)?,
            };
            let sol = solve_milp(&model, cfg)?;
            records.push(BenchRecord {
                architecture: inst.architecture.clone(),
                instance: idx,
                encoding,
                seconds: sol.wall_time_s,
                status: sol.status,
                objective: sol.objective,
                nodes: sol.nodes,
            });
        }
    }
    let mut rows = Vec::new();
    let mut seen: Vec<&str> = Vec::new();
    for inst in instances {
        if seen.contains(&inst.architecture.as_str()) {
            continue;
        }
        seen.push(&inst.architecture);
        for encoding in [Encoding::Mvnn, Encoding::Relu] {
            let group: Vec<&BenchRecord> = records
                .iter()
                .filter(|r| r.architecture == inst.architecture && r.encoding == encoding)
                .collect();
            let times: Vec<f64> = group.iter().map(|r| r.seconds).collect();
            let (mean_s, ci95_s) = mean_ci95(&times);
            rows.push(BenchRow {
                architecture: inst.architecture.clone(),
                encoding,
                mean_s,
                ci95_s,
                timeouts: group.iter().filter(|r| r.status == Status::Timeout).count(),
            });
        }
    }
    Ok(BenchReport { records, rows })
}
