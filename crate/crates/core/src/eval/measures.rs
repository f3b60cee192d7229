//! Per-quantity accuracy of predicted intermediate measures on held-out
//! designs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{mae, mre, pcc, Mre, Pcc};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::machine::{IntermediateMeasures, LossComponents};
use crate::nn::samples::predict_measures;
use crate::nn::SurrogateNet;

pub const QUANTITIES: [&str; 8] = [
    "eddy_rotor",
    "eddy_stator",
    "hyst_rotor",
    "hyst_stator",
    "torque",
    "flux1",
    "flux2",
    "flux3",
];

pub fn quantity_unit(q: &str) -> &'static str {
    match q {
        "torque" => "Nm",
        "flux1" | "flux2" | "flux3" => "Wb",
        _ => "J",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityMetrics {
    pub quantity: String,
    pub unit: String,
    pub mre: Mre,
    /// Mean over operating points of the step-averaged absolute error.
    pub mae: f64,
    pub pcc: Pcc,
    /// `max - min` of the true values.
    pub truth_range: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub designs: Vec<usize>,
    pub quantities: Vec<QuantityMetrics>,
    /// Loss components clamped at zero over all predictions.
    pub clamped: usize,
}

impl MeasureReport {
    pub fn get(&self, q: &str) -> Option<&QuantityMetrics> {
        self.quantities.iter().find(|m| m.quantity == q)
    }
}

fn values(m: &IntermediateMeasures, q: usize) -> &[f64] {
    match q {
        4 => &m.torque,
        5..=7 => &m.flux[q - 5],
        _ => unreachable!("loss components handled separately"),
    }
}

/// Metrics of predicted against true measures, pooled over designs and
/// operating points. Waveform quantities pool every time step.
pub fn measure_metrics(pred: &[Vec<IntermediateMeasures>], truth: &[Vec<IntermediateMeasures>], eps: f64) -> Vec<QuantityMetrics> {
    QUANTITIES
        .iter()
        .enumerate()
        .map(|(q, name)| {
            let mut p = Vec::new();
            let mut t = Vec::new();
            for (pd, td) in pred.iter().zip(truth) {
                for (pm, tm) in pd.iter().zip(td) {
                    if q < 4 {
                        p.push(pm.losses.to_array()[q]);
                        t.push(tm.losses.to_array()[q]);
                    } else {
                        p.extend_from_slice(values(pm, q));
                        t.extend_from_slice(values(tm, q));
                    }
                }
            }
            let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
            QuantityMetrics {
                quantity: name.to_string(),
                unit: quantity_unit(name).into(),
                mre: mre(&p, &t, eps),
                mae: mae(&p, &t),
                pcc: pcc(&p, &t),
                truth_range: hi - lo,
                n: t.len(),
            }
        })
        .collect()
}

pub fn evaluate_measures(net: &SurrogateNet, ds: &Dataset, designs: &[usize], eps: f64) -> Result<MeasureReport> {
    let preds = designs
        .par_iter()
        .map(|&i| predict_measures(net, &ds.designs[i].params, &ds.grid, ds.n_steps))
        .collect::<Result<Vec<_>>>()?;
    let clamped = preds.iter().map(|p| p.clamped).sum();
    let pred: Vec<_> = preds.into_iter().map(|p| p.measures).collect();
    let truth: Vec<_> = designs.iter().map(|&i| ds.designs[i].measures.clone()).collect();
    Ok(MeasureReport {
        designs: designs.to_vec(),
        quantities: measure_metrics(&pred, &truth, eps),
        clamped,
    })
}

const _: () = assert!(LossComponents::NAMES.len() == 4);
