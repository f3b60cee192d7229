use serde::{Deserialize, Serialize};

use super::activation::Activation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub name: String,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
}

/// Common trunk followed by parallel branches, each fed from the trunk's
/// last layer (or from the input when the trunk is empty).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetTopology {
    pub input_dim: usize,
    pub common: Vec<usize>,
    pub branches: Vec<BranchSpec>,
    pub activation: Activation,
}

/// Branch names of the intermediate-measure network, in output order.
pub const HYBRID_BRANCHES: [&str; 5] = ["loss", "torque", "flux1", "flux2", "flux3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Desk,
    Paper,
}

struct Widths {
    common: &'static [usize],
    wide: &'static [usize],
    narrow: &'static [usize],
}

const DESK: Widths = Widths {
    common: &[64, 48, 32],
    wide: &[48, 32],
    narrow: &[24, 16],
};

const PAPER: Widths = Widths {
    common: &[1590, 1410, 810, 210],
    wide: &[1530, 1210, 900, 880, 750, 660, 610, 580, 550, 530],
    narrow: &[322, 278, 240],
};

impl Preset {
    fn widths(self) -> &'static Widths {
        match self {
            Preset::Desk => &DESK,
            Preset::Paper => &PAPER,
        }
    }
}

impl NetTopology {
    /// Multi-branch network predicting `[losses(4), torque, flux1..3]`.
    pub fn hybrid(preset: Preset, input_dim: usize, n_steps: usize) -> Self {
        let w = preset.widths();
        let branch = |name: &str, hidden: &[usize], output_dim| BranchSpec {
            name: name.to_string(),
            hidden: hidden.to_vec(),
            output_dim,
        };
        NetTopology {
            input_dim,
            common: w.common.to_vec(),
            branches: vec![
                branch("loss", w.wide, 4),
                branch("torque", w.wide, n_steps),
                branch("flux1", w.narrow, n_steps),
                branch("flux2", w.narrow, n_steps),
                branch("flux3", w.narrow, n_steps),
            ],
            activation: Activation::Elu,
        }
    }

    /// Direct KPI baseline: the same trunk plus a single wide branch.
    pub fn direct(preset: Preset, input_dim: usize, n_kpis: usize) -> Self {
        let w = preset.widths();
        NetTopology {
            input_dim,
            common: w.common.to_vec(),
            branches: vec![BranchSpec {
                name: "kpi".into(),
                hidden: w.wide.to_vec(),
                output_dim: n_kpis,
            }],
            activation: Activation::Elu,
        }
    }

    pub fn output_dim(&self) -> usize {
        self.branches.iter().map(|b| b.output_dim).sum()
    }

    pub fn trunk_dim(&self) -> usize {
        self.common.last().copied().unwrap_or(self.input_dim)
    }

    pub fn n_params(&self) -> usize {
        let dense = |a: usize, b: usize| a * b + b;
        let mut n = 0;
        let mut prev = self.input_dim;
        for &w in &self.common {
            n += dense(prev, w);
            prev = w;
        }
        for b in &self.branches {
            let mut p = prev;
            for &w in b.hidden.iter().chain(std::iter::once(&b.output_dim)) {
                n += dense(p, w);
                p = w;
            }
        }
        n
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::config("input_dim must be >= 1"));
        }
        if self.branches.is_empty() {
            return Err(Error::config("network needs at least one branch"));
        }
        let widths_ok = self.common.iter().all(|&w| w >= 1)
            && self
                .branches
                .iter()
                .all(|b| b.output_dim >= 1 && b.hidden.iter().all(|&w| w >= 1));
        if !widths_ok {
            return Err(Error::config("all layer widths must be >= 1"));
        }
        Ok(())
    }

    /// Checks the branch names and output sizes of the intermediate-measure net.
    pub fn validate_hybrid(&self, n_steps: usize) -> Result<()> {
        self.validate()?;
        let names: Vec<&str> = self.branches.iter().map(|b| b.name.as_str()).collect();
        if names != HYBRID_BRANCHES {
            return Err(Error::config(format!("hybrid branches must be {HYBRID_BRANCHES:?}, got {names:?}")));
        }
        let dims: Vec<usize> = self.branches.iter().map(|b| b.output_dim).collect();
        if dims != [4, n_steps, n_steps, n_steps, n_steps] {
            return Err(Error::config(format!("hybrid output dims {dims:?} do not match 4 + 4x{n_steps}")));
        }
        Ok(())
    }
}
