//! Design sampling, operating-point grid, forward-model runs, splits and the
//! on-disk dataset format.

pub mod grid;
pub mod lhs;
pub mod split;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use grid::{build_grid, build_grid_checked, OperatingPointGrid};
pub use lhs::sample_designs;
pub use split::{split_designs, split_sizes, Split};

use crate::container::{self, Payload};
use crate::error::{Error, Result};
use crate::machine::{DesignParams, IntermediateMeasures, MachineModel};

pub const MAGIC: &[u8; 8] = b"PMSMDSET";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRecord {
    pub params: DesignParams,
    /// One entry per grid point, in grid order.
    pub measures: Vec<IntermediateMeasures>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub model: MachineModel,
    pub grid: OperatingPointGrid,
    pub n_steps: usize,
    pub seed: u64,
    pub designs: Vec<DesignRecord>,
    pub split: Split,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.designs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.designs.is_empty()
    }

    pub fn n_samples(&self) -> usize {
        self.designs.len() * self.grid.len()
    }

    pub fn design_dim(&self) -> usize {
        self.model.ranges.dim
    }
}

/// Runs the forward model for every (design, operating point) pair. Designs
/// are split 90/5/5 at design level so no design appears in two splits.
pub fn generate(
    model: &MachineModel,
    grid: &OperatingPointGrid,
    n_designs: usize,
    n_steps: usize,
    seed: u64,
) -> Result<Dataset> {
    model.system.validate()?;
    if grid.max_current > model.system.max_current {
        return Err(Error::config("grid max current exceeds the system current limit"));
    }
    let params = sample_designs(n_designs, &model.ranges, seed)?;
    let designs = params
        .into_par_iter()
        .enumerate()
        .map(|(index, params)| {
            let measures = grid
                .points
                .iter()
                .map(|op| model.simulate(&params, op, n_steps))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Design {
                    index,
                    source: Box::new(e),
                })?;
            Ok(DesignRecord { params, measures })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        model: model.clone(),
        grid: grid.clone(),
        n_steps,
        seed,
        split: split_designs(n_designs, seed),
        designs,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    schema_version: u32,
    n_designs: usize,
    design_dim: usize,
    n_steps: usize,
    seed: u64,
    /// Electrical frequency (Hz) at which loss energies per period were evaluated.
    loss_reference_frequency: f64,
    model: MachineModel,
    grid: OperatingPointGrid,
    split: Split,
}

pub fn to_bytes(ds: &Dataset) -> Result<Vec<u8>> {
    let header = Header {
        schema_version: SCHEMA_VERSION,
        n_designs: ds.designs.len(),
        design_dim: ds.design_dim(),
        n_steps: ds.n_steps,
        seed: ds.seed,
        loss_reference_frequency: ds.model.reference_frequency(),
        model: ds.model.clone(),
        grid: ds.grid.clone(),
        split: ds.split.clone(),
    };
    let flat = IntermediateMeasures::flat_len(ds.n_steps);
    let mut payload = Vec::with_capacity(ds.len() * (header.design_dim + ds.grid.len() * flat));
    for d in &ds.designs {
        if d.params.dim() != header.design_dim {
            return Err(Error::Shape {
                context: "design vector",
                expected: header.design_dim,
                got: d.params.dim(),
            });
        }
        payload.extend(d.params.to_vector());
    }
    for d in &ds.designs {
        for m in &d.measures {
            payload.extend(m.to_flat());
        }
    }
    let json = serde_json::to_vec(&header)?;
    Ok(container::encode(MAGIC, SCHEMA_VERSION, &json, &payload))
}

pub fn from_bytes(bytes: &[u8]) -> Result<Dataset> {
    let c = container::decode(bytes, MAGIC, SCHEMA_VERSION)?;
    let h: Header = serde_json::from_slice(&c.header)?;
    if h.schema_version != c.version {
        return Err(Error::Format("header and container versions disagree".into()));
    }
    let mut p = Payload::new(&c.payload);
    let params = (0..h.n_designs)
        .map(|_| DesignParams::from_vector(p.take(h.design_dim)?))
        .collect::<Result<Vec<_>>>()?;
    let flat = IntermediateMeasures::flat_len(h.n_steps);
    let mut designs = Vec::with_capacity(h.n_designs);
    for params in params {
        let measures = (0..h.grid.len())
            .map(|_| IntermediateMeasures::from_flat(p.take(flat)?, h.n_steps))
            .collect::<Result<Vec<_>>>()?;
        designs.push(DesignRecord { params, measures });
    }
    p.finish()?;
    Ok(Dataset {
        model: h.model,
        grid: h.grid,
        n_steps: h.n_steps,
        seed: h.seed,
        designs,
        split: h.split,
    })
}

pub fn save(ds: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(ds)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Dataset> {
    from_bytes(&container::read_file(path)?)
}
