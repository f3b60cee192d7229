//! Synthetic PMSM forward model: design parameters in, per-operating-point
//! torque, flux-linkage waveforms and iron-loss energies out.

pub mod mass;
pub mod model;
pub mod params;

pub use mass::{mass_and_cost, MassCost, PartMasses};
pub use model::{
    IntermediateMeasures, LossComponents, LumpedParams, MachineModel, ModelSettings,
    RippleHarmonic, step_angle,
};
pub use params::{
    DesignParams, DesignRanges, Materials, OperatingPoint, Range, SystemParams, NAMED_FIELDS,
    N_NAMED,
};
