//! Assembly of network inputs and targets from a dataset, and decoding of
//! hybrid-net outputs back into per-point measures.

use ndarray::{Array2, ArrayView2};

use super::net::SurrogateNet;
use crate::dataset::{Dataset, OperatingPointGrid};
use crate::error::{Error, Result};
use crate::machine::{DesignParams, IntermediateMeasures, OperatingPoint};

/// Hybrid input row: design vector followed by `[current, alpha]`.
pub fn hybrid_input(p: &DesignParams, op: &OperatingPoint) -> Vec<f64> {
    let mut v = p.to_vector();
    v.push(op.current);
    v.push(op.alpha);
    v
}

pub fn hybrid_input_dim(design_dim: usize) -> usize {
    design_dim + 2
}

/// One row per (design, operating point) for the given design indices.
pub fn hybrid_samples(ds: &Dataset, designs: &[usize]) -> (Array2<f64>, Array2<f64>) {
    let d_in = hybrid_input_dim(ds.design_dim());
    let d_out = IntermediateMeasures::flat_len(ds.n_steps);
    let rows = designs.len() * ds.grid.len();
    let mut x = Vec::with_capacity(rows * d_in);
    let mut y = Vec::with_capacity(rows * d_out);
    for &i in designs {
        let rec = &ds.designs[i];
        for (op, m) in ds.grid.points.iter().zip(&rec.measures) {
            x.extend(hybrid_input(&rec.params, op));
            y.extend(m.to_flat());
        }
    }
    (
        Array2::from_shape_vec((rows, d_in), x).expect("row length is fixed"),
        Array2::from_shape_vec((rows, d_out), y).expect("row length is fixed"),
    )
}

/// Design-vector rows for the direct network, targets given per design.
pub fn direct_samples(ds: &Dataset, designs: &[usize], targets: &[Vec<f64>]) -> Result<(Array2<f64>, Array2<f64>)> {
    let d_in = ds.design_dim();
    let d_out = targets.first().map(Vec::len).unwrap_or(0);
    let mut x = Vec::with_capacity(designs.len() * d_in);
    let mut y = Vec::with_capacity(designs.len() * d_out);
    for &i in designs {
        let t = targets.get(i).ok_or(Error::Shape {
            context: "direct targets",
            expected: i + 1,
            got: targets.len(),
        })?;
        if t.len() != d_out {
            return Err(Error::Shape {
                context: "direct target row",
                expected: d_out,
                got: t.len(),
            });
        }
        x.extend(ds.designs[i].params.to_vector());
        y.extend_from_slice(t);
    }
    Ok((
        Array2::from_shape_vec((designs.len(), d_in), x).expect("row length is fixed"),
        Array2::from_shape_vec((designs.len(), d_out), y).expect("row length is fixed"),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictedMeasures {
    pub measures: Vec<IntermediateMeasures>,
    /// Number of loss components that came out negative and were clamped to 0.
    pub clamped: usize,
}

/// Predicted measures for every grid point of one design.
pub fn predict_measures(
    net: &SurrogateNet,
    p: &DesignParams,
    grid: &OperatingPointGrid,
    n_steps: usize,
) -> Result<PredictedMeasures> {
    let rows: Vec<f64> = grid.points.iter().flat_map(|op| hybrid_input(p, op)).collect();
    let x = Array2::from_shape_vec((grid.len(), hybrid_input_dim(p.dim())), rows).expect("row length is fixed");
    decode_predictions(net.predict(x.view())?.view(), n_steps)
}

pub fn decode_predictions(out: ArrayView2<f64>, n_steps: usize) -> Result<PredictedMeasures> {
    let mut clamped = 0;
    let mut measures = Vec::with_capacity(out.nrows());
    for row in out.rows() {
        let mut m = IntermediateMeasures::from_flat(row.as_slice().unwrap_or(&row.to_vec()), n_steps)?;
        let mut l = m.losses.to_array();
        for v in &mut l {
            if *v < 0.0 {
                *v = 0.0;
                clamped += 1;
            }
        }
        m.losses = crate::machine::LossComponents::from_array(l);
        measures.push(m);
    }
    Ok(PredictedMeasures { measures, clamped })
}
