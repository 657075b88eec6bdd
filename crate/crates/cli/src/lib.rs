//! Command-line front end: a JSON manifest plus a few overriding flags drive training,
//! construction, winner determination, auction simulation, benchmarking and domain
//! generation. Every command writes its outputs into `--out`, with wall-clock data kept
//! in a separate `meta.json`.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::path::PathBuf;
use std::time::Instant;

use chrono::Utc;
use clap::{Parser, Subcommand};
use serde_json::json;

pub use config::RunConfig;
pub use error::{exit, CliError, CliResult};

use io::OutDir;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Fit a network to a dataset and report held-out R², Kendall tau and MAE.
    Train,
    /// Build the exact network for a value table or an interpolating one for a dataset.
    Construct,
    /// Solve the winner-determination problem over stored networks.
    Wdp,
    /// Run MLCA and random search on random domains.
    Mlca,
    /// Compare MILP solve times of the two encodings.
    Bench,
    /// Sample a random monotone domain.
    Gen,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::Construct => "construct",
            Command::Wdp => "wdp",
            Command::Mlca => "mlca",
            Command::Bench => "bench",
            Command::Gen => "gen",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mvnn-auction", version, about = "MVNN training, winner determination and auction simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON manifest; defaults apply to everything it leaves out.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Write the MILP in LP format (wdp).
    #[arg(long, global = true)]
    pub export_lp: bool,
    /// Disable encoding simplifications (wdp).
    #[arg(long, global = true)]
    pub no_prune: bool,
    /// Worker threads for seed-level parallelism (mlca).
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
}

impl Cli {
    pub fn resolve_config(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.override_seed(seed);
        }
        if self.export_lp {
            cfg.wdp.export_lp = true;
        }
        if self.no_prune {
            cfg.wdp.prune = false;
        }
        if self.workers == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        Ok(cfg)
    }
}

/// Executes one command and writes its outputs plus `meta.json`.
pub fn run(cli: &Cli) -> CliResult<()> {
    let cfg = cli.resolve_config()?;
    let started = Utc::now();
    let clock = Instant::now();
    let out = OutDir::create(&cli.out)?;
    let mut extra = json!({});
    match cli.command {
        Command::Train => {
            let o = commands::train::run(&cfg)?;
            commands::train::write(&o, cfg.format, &out)?;
        }
        Command::Construct => {
            let o = commands::construct::run(&cfg)?;
            commands::construct::write(&o, &out)?;
            extra = json!({ "max_error": o.max_error });
        }
        Command::Wdp => {
            let o = commands::wdp::run(&cfg)?;
            commands::wdp::write(&o, cfg.format, &out)?;
            extra = json!({ "solve_s": o.solution.wall_time_s });
        }
        Command::Mlca => {
            let o = commands::mlca::run(&cfg, cli.workers)?;
            commands::mlca::write(&o, &out)?;
            extra = json!({
                "instances": commands::mlca::runtimes(&o),
                "generator": commands::gen::generator_note(&cfg.mlca.domain),
            });
        }
        Command::Bench => {
            let o = commands::bench::run(&cfg)?;
            commands::bench::write(&o, &out)?;
        }
        Command::Gen => {
            let o = commands::gen::run(&cfg)?;
            commands::gen::write(&cfg, &o, &out)?;
            extra = json!({ "generator": commands::gen::generator_note(&cfg.gen.domain) });
        }
    }
    let meta = json!({
        "command": cli.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "started_at": started.to_rfc3339(),
        "finished_at": Utc::now().to_rfc3339(),
        "runtime_s": clock.elapsed().as_secs_f64(),
        "details": extra,
    });
    out.write_json("meta.json", &meta)?;
    Ok(())
}
