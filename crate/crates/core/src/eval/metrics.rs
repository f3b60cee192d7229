use serde::{Deserialize, Serialize};

/// Default MRE exclusion threshold on `|truth|`, native units.
pub const MRE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mre {
    /// Percent; NaN when every sample was excluded.
    pub value: f64,
    pub used: usize,
    pub excluded: usize,
}

/// Mean relative error in percent over samples with `|truth| >= eps`.
pub fn mre(pred: &[f64], truth: &[f64], eps: f64) -> Mre {
    assert_eq!(pred.len(), truth.len());
    let mut acc = 0.0;
    let mut used = 0;
    for (&p, &t) in pred.iter().zip(truth) {
        if t.abs() >= eps {
            acc += ((p - t) / t).abs();
            used += 1;
        }
    }
    Mre {
        value: if used > 0 { 100.0 * acc / used as f64 } else { f64::NAN },
        used,
        excluded: truth.len() - used,
    }
}

pub fn mae(pred: &[f64], truth: &[f64]) -> f64 {
    assert_eq!(pred.len(), truth.len());
    let n = pred.len().max(1) as f64;
    pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pcc {
    pub value: f64,
    /// Set when either input has zero variance; `value` is then NaN.
    pub degenerate: bool,
}

/// Pearson sample correlation.
pub fn pcc(pred: &[f64], truth: &[f64]) -> Pcc {
    assert_eq!(pred.len(), truth.len());
    let n = pred.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let mt = truth.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&p, &t) in pred.iter().zip(truth) {
        let (dp, dt) = (p - mp, t - mt);
        sxy += dp * dt;
        sxx += dp * dp;
        syy += dt * dt;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Pcc {
            value: f64::NAN,
            degenerate: true,
        };
    }
    Pcc {
        value: (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0),
        degenerate: false,
    }
}
