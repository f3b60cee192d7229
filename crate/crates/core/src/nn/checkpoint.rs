//! Trained-network files: JSON header with topology, normalizer statistics
//! and training settings, then the flat parameter vector.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::net::SurrogateNet;
use super::normalize::{MinMax, Standardizer};
use super::topology::NetTopology;
use super::train::TrainConfig;
use crate::container;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PMSMCKPT";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NetKind {
    /// Predicts intermediate measures per operating point.
    Hybrid,
    /// Predicts KPIs straight from design parameters.
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: NetKind,
    pub net: SurrogateNet,
    pub train: TrainConfig,
    pub best_epoch: usize,
    /// Waveform length for hybrid nets.
    pub n_steps: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    schema_version: u32,
    kind: NetKind,
    topology: NetTopology,
    input_norm: MinMax,
    output_norm: Standardizer,
    train: TrainConfig,
    seed: u64,
    best_epoch: usize,
    n_steps: usize,
    n_params: usize,
}

pub fn to_bytes(c: &Checkpoint) -> Result<Vec<u8>> {
    let h = Header {
        schema_version: SCHEMA_VERSION,
        kind: c.kind,
        topology: c.net.topology.clone(),
        input_norm: c.net.input_norm.clone(),
        output_norm: c.net.output_norm.clone(),
        train: c.train,
        seed: c.train.seed,
        best_epoch: c.best_epoch,
        n_steps: c.n_steps,
        n_params: c.net.n_params(),
    };
    let json = serde_json::to_vec(&h)?;
    Ok(container::encode(MAGIC, SCHEMA_VERSION, &json, &c.net.params))
}

pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
    let c = container::decode(bytes, MAGIC, SCHEMA_VERSION)?;
    let h: Header = serde_json::from_slice(&c.header)?;
    if h.schema_version != c.version {
        return Err(Error::Format("header and container versions disagree".into()));
    }
    if h.n_params != c.payload.len() {
        return Err(Error::Shape {
            context: "checkpoint parameters",
            expected: h.n_params,
            got: c.payload.len(),
        });
    }
    let net = SurrogateNet::from_parts(h.topology, c.payload, h.input_norm, h.output_norm)?;
    Ok(Checkpoint {
        kind: h.kind,
        net,
        train: h.train,
        best_epoch: h.best_epoch,
        n_steps: h.n_steps,
    })
}

pub fn save(c: &Checkpoint, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(c)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    from_bytes(&container::read_file(path)?)
}
