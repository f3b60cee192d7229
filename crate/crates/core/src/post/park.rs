//! Amplitude-invariant Park transform.
//!
//! Coil `k` (0-based) is referenced to `theta_e - 2 pi k / 3`, so a balanced
//! set is `psi_k = psi_d cos(theta_k) - psi_q sin(theta_k)`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Per-step `(psi_d, psi_q)` of three phase waveforms at electrical angles
/// `thetas` (rad).
pub fn park_transform(flux: [&[f64]; 3], thetas: &[f64]) -> Result<Vec<(f64, f64)>> {
    for f in flux {
        if f.len() != thetas.len() {
            return Err(Error::Shape {
                context: "flux waveform",
                expected: thetas.len(),
                got: f.len(),
            });
        }
    }
    Ok(thetas
        .iter()
        .enumerate()
        .map(|(j, &th)| {
            let mut d = 0.0;
            let mut q = 0.0;
            for (k, f) in flux.iter().enumerate() {
                let a = th - TAU * k as f64 / 3.0;
                d += f[j] * a.cos();
                q -= f[j] * a.sin();
            }
            (2.0 / 3.0 * d, 2.0 / 3.0 * q)
        })
        .collect())
}

/// Step-averaged dq flux linkages.
pub fn park_mean(flux: [&[f64]; 3], thetas: &[f64]) -> Result<(f64, f64)> {
    let dq = park_transform(flux, thetas)?;
    let n = dq.len().max(1) as f64;
    let (d, q) = dq.iter().fold((0.0, 0.0), |(a, b), &(d, q)| (a + d, b + q));
    Ok((d / n, q / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::step_angle;

    fn triple(f: impl Fn(f64) -> f64) -> (Vec<f64>, [Vec<f64>; 3]) {
        let th: Vec<f64> = (0..15).map(|k| step_angle(k, 15)).collect();
        let w = std::array::from_fn(|k| th.iter().map(|&t| f(t - TAU * k as f64 / 3.0)).collect());
        (th, w)
    }

    #[test]
    fn cosine_triple_is_pure_d() {
        let (th, w) = triple(|a| 0.1 * a.cos());
        let (d, q) = park_mean([&w[0], &w[1], &w[2]], &th).unwrap();
        assert!((d - 0.1).abs() < 1e-12 && q.abs() < 1e-12);
    }

    #[test]
    fn sine_triple_is_negative_q() {
        let (th, w) = triple(|a| 0.1 * a.sin());
        let (d, q) = park_mean([&w[0], &w[1], &w[2]], &th).unwrap();
        assert!(d.abs() < 1e-12 && (q + 0.1).abs() < 1e-12);
    }

    #[test]
    fn zeros_and_shape() {
        let z = vec![0.0; 15];
        let th: Vec<f64> = (0..15).map(|k| step_angle(k, 15)).collect();
        assert_eq!(park_mean([&z, &z, &z], &th).unwrap(), (0.0, 0.0));
        assert!(park_transform([&z, &z, &z[..14]], &th).is_err());
    }
}
