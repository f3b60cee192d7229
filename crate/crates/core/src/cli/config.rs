//! Run configuration: a TOML document layered as flag > file > default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{build_grid, OperatingPointGrid};
use crate::error::{Error, Result};
use crate::eval::compare::{CompareSettings, DEFAULT_FRACTIONS};
use crate::eval::metrics::MRE_EPS;
use crate::machine::{DesignRanges, MachineModel, ModelSettings, SystemParams};
use crate::nn::{Preset, TrainConfig};
use crate::post::PostSettings;

pub const DEFAULT_SEED: u64 = 2024;
pub const OUT_ROOT_ENV: &str = "PMSM_OUT";
pub const DEFAULT_OUT_ROOT: &str = "runs";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Root under which run directories are created.
    pub out_root: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    /// Hybrid checkpoint used by `evaluate`, `kpi` and `effmap`.
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_designs: usize,
    pub n_amplitudes: usize,
    pub n_angles: usize,
    pub n_steps: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_designs: 500,
            n_amplitudes: 6,
            n_angles: 6,
            n_steps: 15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotConfig {
    pub curves: bool,
    pub effmap: bool,
    pub compare: bool,
}

impl Default for PlotConfig {
    fn default() -> Self {
        PlotConfig {
            curves: true,
            effmap: true,
            compare: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub fractions: Vec<f64>,
    pub mre_eps: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            fractions: DEFAULT_FRACTIONS.to_vec(),
            mre_eps: MRE_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds design sampling, splits and network initialization.
    pub seed: u64,
    pub preset: Preset,
    pub paths: PathsConfig,
    pub system: SystemParams,
    pub ranges: DesignRanges,
    pub model: ModelSettings,
    pub grid: GridConfig,
    /// `train.seed` follows `seed` unless set explicitly in the file.
    pub train: TrainConfig,
    pub post: PostSettings,
    pub plots: PlotConfig,
    pub compare: CompareConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            preset: Preset::Desk,
            paths: PathsConfig::default(),
            system: SystemParams::default(),
            ranges: DesignRanges::default(),
            model: ModelSettings::default(),
            grid: GridConfig::default(),
            train: TrainConfig {
                seed: DEFAULT_SEED,
                ..TrainConfig::default()
            },
            post: PostSettings::default(),
            plots: PlotConfig::default(),
            compare: CompareConfig::default(),
        }
    }
}

/// Values that command-line flags may override.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub preset: Option<Preset>,
    pub out_root: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config(e.message().to_string()))?;
        let explicit_train_seed = raw
            .get("train")
            .and_then(|t| t.as_table())
            .is_some_and(|t| t.contains_key("seed"));
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::config(e.message().to_string()))?;
        if !explicit_train_seed {
            cfg.train.seed = cfg.seed;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::MissingFile(path.to_path_buf()))
            }
            Err(e) => return Err(e.into()),
        };
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    /// Applies flag overrides. A `--seed` flag also reseeds training.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
            self.train.seed = s;
        }
        if let Some(p) = o.preset {
            self.preset = p;
        }
        if let Some(r) = &o.out_root {
            self.paths.out_root = Some(r.clone());
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.ranges.validate()?;
        self.train.validate()?;
        if self.grid.n_designs == 0 {
            return Err(Error::config("grid.n_designs must be >= 1"));
        }
        if self.grid.n_steps < 2 {
            return Err(Error::config("grid.n_steps must be >= 2"));
        }
        if self.compare.fractions.is_empty() {
            return Err(Error::config("compare.fractions must not be empty"));
        }
        Ok(())
    }

    /// Output root: config file, then the environment, then `runs`.
    pub fn out_root(&self) -> PathBuf {
        self.paths
            .out_root
            .clone()
            .or_else(|| std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT))
    }

    pub fn machine(&self) -> Result<MachineModel> {
        MachineModel::new(self.system.clone(), self.ranges.clone(), self.model.clone())
    }

    pub fn op_grid(&self) -> Result<OperatingPointGrid> {
        build_grid(self.system.max_current, self.grid.n_amplitudes, self.grid.n_angles)
    }

    pub fn compare_settings(&self) -> CompareSettings {
        CompareSettings {
            fractions: self.compare.fractions.clone(),
            preset: self.preset,
            train: self.train,
            post: self.post,
            mre_eps: self.compare.mre_eps,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot serialize config: {e}")))
    }
}
