use mvnn_core::milp::{encode_relu_wdp, encode_wdp, export_lp, EncodeOptions};
use mvnn_core::solver::{brute_force, monotone_bnb, solve_milp, Solution, Status};
use mvnn_core::MvnnParams;
use serde::Serialize;

use crate::config::{Format, RunConfig, WdpMethod};
use crate::error::{CliError, CliResult, Context};
use crate::io::{read_json, OutDir};

#[derive(Clone, Debug)]
pub struct WdpOutcome {
    pub solution: Solution,
    /// The LP text of the model, when the MILP was built and export was requested.
    pub lp: Option<String>,
}

#[derive(Serialize)]
struct SolutionRow {
    status: Status,
    objective: f64,
    bound: f64,
    nodes: u64,
    allocation: String,
}

fn load_models(cfg: &RunConfig) -> CliResult<Vec<MvnnParams>> {
    if cfg.wdp.models.is_empty() {
        return Err(CliError::Usage("wdp needs at least one model in `wdp.models`".into()));
    }
    cfg.wdp
        .models
        .iter()
        .map(|p| {
            let m: MvnnParams = read_json(p)?;
            m.validate().map_err(|e| CliError::File {
                path: p.clone(),
                message: e.to_string(),
            })?;
            Ok(m)
        })
        .collect()
}

/// Encodes the networks' winner-determination problem and solves it.
pub fn run(cfg: &RunConfig) -> CliResult<WdpOutcome> {
    let s = &cfg.wdp;
    s.solve.validate().context(|| "wdp.solve".into())?;
    let nets = load_models(cfg)?;
    let items = nets[0].items();
    if let Some((k, n)) = nets.iter().enumerate().find(|(_, n)| n.items() != items) {
        return Err(CliError::File {
            path: s.models[k].clone(),
            message: format!("model has {} inputs, the first model has {items}", n.items()),
        });
    }
    let monotone = nets.iter().all(|n| n.is_projected());
    let milp = s.method == WdpMethod::Milp || s.export_lp;
    let model = if milp {
        let m = if s.relu_encoding || !monotone {
            encode_relu_wdp(&nets, items)
        } else {
            let opts = if s.prune {
                EncodeOptions::default()
            } else {
                EncodeOptions::unpruned()
            };
            encode_wdp(&nets, items, opts)
        };
        Some(m.context(|| "encoding the winner-determination problem".into())?)
    } else {
        None
    };
    let solution = match s.method {
        WdpMethod::Milp => solve_milp(model.as_ref().expect("built above"), &s.solve),
        WdpMethod::MonotoneBnb => monotone_bnb(&nets, items, &s.solve),
        WdpMethod::BruteForce => brute_force(&nets, items).map(|(objective, allocation)| Solution {
            allocation: Some(allocation),
            objective,
            bound: objective,
            status: Status::Optimal,
            nodes: 0,
            values: Vec::new(),
            wall_time_s: 0.0,
        }),
    }
    .context(|| format!("solving with {:?}", s.method))?;
    let lp = if s.export_lp { model.as_ref().map(export_lp) } else { None };
    Ok(WdpOutcome { solution, lp })
}

pub fn write(outcome: &WdpOutcome, format: Format, out: &OutDir) -> CliResult<()> {
    let sol = &outcome.solution;
    match format {
        Format::Json => {
            out.write_json("solution.json", sol)?;
        }
        Format::Csv => {
            let allocation = sol
                .allocation
                .as_ref()
                .map(|a| a.bundles().iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            out.write_csv(
                "solution.csv",
                &[SolutionRow {
                    status: sol.status,
                    objective: sol.objective,
                    bound: sol.bound,
                    nodes: sol.nodes,
                    allocation,
                }],
            )?;
        }
    }
    if let Some(lp) = &outcome.lp {
        out.write_text("model.lp", lp)?;
    }
    Ok(())
}
