//! The JSON experiment manifest. Every command reads its own section; missing sections
//! and fields take their defaults. Relative paths are resolved against the directory of
//! the manifest and must exist when it is loaded.

use std::path::{Path, PathBuf};

use mvnn_core::mlca::MlcaConfig;
use mvnn_core::mvnn::TrainConfig;
use mvnn_core::prefgen::DomainSpec;
use mvnn_core::solver::SolveConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub format: Format,
    pub train: TrainSection,
    pub construct: ConstructSection,
    pub wdp: WdpSection,
    pub mlca: MlcaSection,
    pub bench: BenchSection,
    pub gen: GenSection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// Gradient training with the `config` block.
    #[default]
    Train,
    /// The exact interpolating construction (monotone-consistent data only).
    Interpolate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    /// Dataset CSV with `bundle_bits,value` rows. Either this or `domain` is used.
    pub data: Option<PathBuf>,
    /// Optional separate held-out CSV; otherwise `holdout` of `data` is held out.
    pub test_data: Option<PathBuf>,
    pub holdout: f64,
    /// Sample training and test sets from bidder 0 of this random domain instead.
    pub domain: Option<DomainSpec>,
    /// Training points per seed when sampling from `domain`.
    pub train_size: usize,
    pub test_size: usize,
    /// Seeds for domain sampling; the top-level seed is used when empty.
    pub seeds: Vec<u64>,
    pub hidden: Vec<usize>,
    pub method: FitMethod,
    /// Also fit an unconstrained ReLU network of the same shape.
    pub compare_unconstrained: bool,
    pub config: TrainConfig,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            data: None,
            test_data: None,
            holdout: 0.2,
            domain: None,
            train_size: 50,
            test_size: 200,
            seeds: Vec::new(),
            hidden: vec![10, 10],
            method: FitMethod::Train,
            compare_unconstrained: false,
            config: TrainConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructSection {
    /// JSON value table `{"items": m, "values": [...]}` in bundle-index order.
    pub table: Option<PathBuf>,
    /// Dataset CSV to interpolate.
    pub data: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WdpMethod {
    #[default]
    Milp,
    MonotoneBnb,
    BruteForce,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WdpSection {
    /// One model JSON per bidder.
    pub models: Vec<PathBuf>,
    pub method: WdpMethod,
    pub prune: bool,
    pub export_lp: bool,
    /// Use the plain ReLU encoding even for monotone networks.
    pub relu_encoding: bool,
    pub solve: SolveConfig,
}

impl Default for WdpSection {
    fn default() -> Self {
        WdpSection {
            models: Vec::new(),
            method: WdpMethod::Milp,
            prune: true,
            export_lp: false,
            relu_encoding: false,
            solve: SolveConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlcaSection {
    pub domain: DomainSpec,
    pub auction: MlcaConfig,
    /// Number of instances; instance `k` uses seed `seed + k` for domain and auction.
    pub instances: usize,
    /// Explicit seeds; overrides `instances` when non-empty.
    pub seeds: Vec<u64>,
}

impl Default for MlcaSection {
    fn default() -> Self {
        MlcaSection {
            domain: DomainSpec::default(),
            auction: MlcaConfig::default(),
            instances: 10,
            seeds: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    /// Hidden widths per architecture.
    pub architectures: Vec<Vec<usize>>,
    pub instances: usize,
    pub bidders: usize,
    pub items: usize,
    pub cutoff: f64,
    pub solve: SolveConfig,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            architectures: vec![vec![4], vec![6], vec![4, 4]],
            instances: 5,
            bidders: 2,
            items: 5,
            cutoff: 1.0,
            solve: SolveConfig {
                timeout_s: 200.0,
                ..SolveConfig::exact()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSection {
    pub domain: DomainSpec,
    /// Write full value tables when the domain has at most this many items.
    pub table_items: usize,
    /// Also compute the efficient allocation.
    pub optimum: bool,
}

impl Default for GenSection {
    fn default() -> Self {
        GenSection {
            domain: DomainSpec::default(),
            table_items: 12,
            optimum: true,
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) -> CliResult<()> {
    if p.is_relative() {
        *p = base.join(&*p);
    }
    if !p.exists() {
        return Err(CliError::Usage(format!("referenced path {} does not exist", p.display())));
    }
    Ok(())
}

impl RunConfig {
    /// Reads a manifest and resolves the paths it references.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}:{}: {e}", path.display(), e.line())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base)?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) -> CliResult<()> {
        for p in self.train.data.iter_mut().chain(self.train.test_data.iter_mut()) {
            resolve(base, p)?;
        }
        for p in self.construct.table.iter_mut().chain(self.construct.data.iter_mut()) {
            resolve(base, p)?;
        }
        for p in &mut self.wdp.models {
            resolve(base, p)?;
        }
        Ok(())
    }

    /// Applies `--seed` to every seeded section.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.train.seeds.clear();
        self.mlca.seeds.clear();
        self.gen.domain.seed = seed;
    }
}
