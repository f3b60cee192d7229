//! Physics post-processing: dq maps, limit and characteristic curves,
//! efficiency maps and KPIs from per-operating-point measures.

pub mod curves;
pub mod effmap;
pub mod export;
pub mod kpi;
pub mod limit;
pub mod maps;
pub mod park;

pub use curves::{characteristic_curves, open_circuit_voltage, short_circuit_current, CharacteristicCurves};
pub use effmap::{difference_map, efficiency_map, CellStatus, DifferenceMap, EffMapSettings, EfficiencyMap};
pub use kpi::{classical_kpis, evaluate_design, kpis, DesignEvaluation, KpiVector, PostSettings, KPI_NAMES, N_KPIS};
pub use limit::{limit_curve, LimitCurve, LimitPoint, SearchSettings};
pub use maps::{build_maps, DqMaps};
pub use park::{park_mean, park_transform};
