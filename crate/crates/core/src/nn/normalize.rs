use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

/// Per-feature min-max scaling to [0, 1]. Constant features map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: Vec<f64>,
    pub span: Vec<f64>,
}

impl MinMax {
    pub fn identity(dim: usize) -> Self {
        MinMax {
            min: vec![0.0; dim],
            span: vec![1.0; dim],
        }
    }

    pub fn fit(x: ArrayView2<f64>) -> Self {
        let mut min = Vec::with_capacity(x.ncols());
        let mut span = Vec::with_capacity(x.ncols());
        for col in x.axis_iter(Axis(1)) {
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let s = hi - lo;
            min.push(lo);
            span.push(if s > 0.0 && s.is_finite() { s } else { 1.0 });
        }
        MinMax { min, span }
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.min).zip(&self.span) {
                *v = (*v - m) / s;
            }
        }
        out
    }

    pub fn invert(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.min).zip(&self.span) {
                *v = *v * s + m;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.min.iter().chain(&self.span).all(|v| v.is_finite())
    }
}

/// Per-channel standardization to zero mean, unit variance. Constant
/// channels keep unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn identity(dim: usize) -> Self {
        Standardizer {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn fit(y: ArrayView2<f64>) -> Self {
        let n = y.nrows().max(1) as f64;
        let mut mean = Vec::with_capacity(y.ncols());
        let mut std = Vec::with_capacity(y.ncols());
        for col in y.axis_iter(Axis(1)) {
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let s = var.sqrt();
            mean.push(m);
            std.push(if s > 1e-300 && s.is_finite() { s } else { 1.0 });
        }
        Standardizer { mean, std }
    }

    pub fn apply(&self, y: ArrayView2<f64>) -> Array2<f64> {
        let mut out = y.to_owned();
        for mut row in out.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        out
    }

    pub fn invert(&self, y: ArrayView2<f64>) -> Array2<f64> {
        let mut out = y.to_owned();
        for mut row in out.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = *v * s + m;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.mean.iter().chain(&self.std).all(|v| v.is_finite())
    }
}
