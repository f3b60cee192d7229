use serde::{Deserialize, Serialize};

use super::curves::{characteristic_curves, CharacteristicCurves};
use super::effmap::EffMapSettings;
use super::limit::{linspace, SearchSettings};
use super::maps::{build_maps, DqMaps};
use crate::dataset::OperatingPointGrid;
use crate::error::Result;
use crate::machine::{mass_and_cost, DesignParams, IntermediateMeasures, MachineModel, MassCost};

pub const N_KPIS: usize = 7;
pub const KPI_NAMES: [&str; N_KPIS] = ["z1", "z2", "z3", "z4", "z5", "z6", "z7"];
pub const KPI_UNITS: [&str; N_KPIS] = ["Nm", "W", "W", "Nm", "EUR", "kg", "Nm"];
pub const KPI_LABELS: [&str; N_KPIS] = [
    "max torque on limit curve",
    "max shaft power",
    "shaft power at max speed",
    "max torque ripple on limit curve",
    "material cost",
    "mass of active parts",
    "torque ripple deviation",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpiVector {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub z4: f64,
    pub z5: f64,
    pub z6: f64,
    pub z7: f64,
}

impl KpiVector {
    pub fn to_array(&self) -> [f64; N_KPIS] {
        [self.z1, self.z2, self.z3, self.z4, self.z5, self.z6, self.z7]
    }

    pub fn from_array(a: [f64; N_KPIS]) -> Self {
        KpiVector {
            z1: a[0],
            z2: a[1],
            z3: a[2],
            z4: a[3],
            z5: a[4],
            z6: a[5],
            z7: a[6],
        }
    }

    /// JSON record keyed `z1..z7`, each with value, unit and description.
    pub fn to_json(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        for (k, v) in self.to_array().into_iter().enumerate() {
            m.insert(
                KPI_NAMES[k].into(),
                serde_json::json!({"value": v, "unit": KPI_UNITS[k], "label": KPI_LABELS[k]}),
            );
        }
        serde_json::Value::Object(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostSettings {
    /// Speed samples of the characteristic curves, from 0 to max speed.
    pub n_speeds: usize,
    pub search: SearchSettings,
    pub effmap: EffMapSettings,
}

impl Default for PostSettings {
    fn default() -> Self {
        PostSettings {
            n_speeds: 41,
            search: SearchSettings::default(),
            effmap: EffMapSettings::default(),
        }
    }
}

/// z1..z7 from the characteristic curves and the mass/cost breakdown.
///
/// Ripple statistics use the feasible limit-curve points; z7 is their
/// population standard deviation.
pub fn kpis(curves: &CharacteristicCurves, mc: &MassCost) -> KpiVector {
    let lim = &curves.limit;
    let feas: Vec<_> = lim.feasible().collect();
    let z1 = feas.iter().map(|p| p.torque).fold(0.0, f64::max);
    let z2 = feas.iter().map(|p| p.shaft_power).fold(0.0, f64::max);
    let z3 = lim
        .points
        .last()
        .filter(|p| p.feasible)
        .map_or(0.0, |p| p.shaft_power.max(0.0));
    let ripples: Vec<f64> = feas.iter().map(|p| p.ripple).collect();
    let z4 = ripples.iter().copied().fold(0.0, f64::max);
    let z7 = if ripples.is_empty() {
        0.0
    } else {
        let n = ripples.len() as f64;
        let mean = ripples.iter().sum::<f64>() / n;
        (ripples.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt()
    };
    KpiVector {
        z1,
        z2,
        z3,
        z4,
        z5: mc.total_cost,
        z6: mc.total_mass,
        z7,
    }
}

/// Maps, curves and KPIs of one design from a full set of per-point measures.
#[derive(Debug, Clone)]
pub struct DesignEvaluation {
    pub maps: DqMaps,
    pub curves: CharacteristicCurves,
    pub mass_cost: MassCost,
    pub kpis: KpiVector,
}

pub fn curve_speeds(model: &MachineModel, settings: &PostSettings) -> Vec<f64> {
    linspace(0.0, model.system.max_speed, settings.n_speeds)
}

pub fn design_maps(
    model: &MachineModel,
    p: &DesignParams,
    measures: &[IntermediateMeasures],
    grid: &OperatingPointGrid,
) -> Result<DqMaps> {
    build_maps(
        measures,
        grid,
        p.stator_resistance,
        model.system.pole_pairs,
        model.reference_frequency(),
    )
}

pub fn evaluate_design(
    model: &MachineModel,
    p: &DesignParams,
    measures: &[IntermediateMeasures],
    grid: &OperatingPointGrid,
    settings: &PostSettings,
) -> Result<DesignEvaluation> {
    let maps = design_maps(model, p, measures, grid)?;
    let s = &model.system;
    let curves = characteristic_curves(
        &maps,
        &curve_speeds(model, settings),
        s.max_current,
        s.voltage_limit(),
        &settings.search,
    );
    let mass_cost = mass_and_cost(p, s);
    let kpis = kpis(&curves, &mass_cost);
    Ok(DesignEvaluation {
        maps,
        curves,
        mass_cost,
        kpis,
    })
}

/// Oracle measures for every grid point of a design.
pub fn oracle_measures(
    model: &MachineModel,
    p: &DesignParams,
    grid: &OperatingPointGrid,
    n_steps: usize,
) -> Result<Vec<IntermediateMeasures>> {
    grid.points.iter().map(|op| model.simulate(p, op, n_steps)).collect()
}

/// Classical path: oracle measures straight into the post-processor.
pub fn classical_kpis(
    model: &MachineModel,
    p: &DesignParams,
    grid: &OperatingPointGrid,
    n_steps: usize,
    settings: &PostSettings,
) -> Result<DesignEvaluation> {
    let ms = oracle_measures(model, p, grid, n_steps)?;
    evaluate_design(model, p, &ms, grid, settings)
}
