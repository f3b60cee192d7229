use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::OperatingPoint;

/// Operating-point lattice: one zero-current point followed by an
/// amplitude-major `n_amplitudes x n_angles` lattice on the half-plane
/// `alpha in [0, 180]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPointGrid {
    pub max_current: f64,
    pub n_amplitudes: usize,
    pub n_angles: usize,
    pub points: Vec<OperatingPoint>,
}

impl OperatingPointGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Amplitude levels including the zero level.
    pub fn amplitudes(&self) -> Vec<f64> {
        (0..=self.n_amplitudes)
            .map(|k| self.max_current * k as f64 / self.n_amplitudes as f64)
            .collect()
    }

    pub fn angles(&self) -> Vec<f64> {
        angle_levels(self.n_angles)
    }

    /// Index into `points` of lattice node (amplitude level `a >= 1`, angle `j`).
    pub fn index(&self, a: usize, j: usize) -> usize {
        if a == 0 {
            0
        } else {
            1 + (a - 1) * self.n_angles + j
        }
    }
}

fn angle_levels(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|j| 180.0 * j as f64 / (n - 1) as f64).collect()
}

pub fn build_grid(max_current: f64, n_amplitudes: usize, n_angles: usize) -> Result<OperatingPointGrid> {
    if n_amplitudes == 0 || n_angles == 0 {
        return Err(Error::config("grid needs at least one amplitude and one angle"));
    }
    if !(max_current.is_finite() && max_current > 0.0) {
        return Err(Error::config(format!("max_current must be positive, got {max_current}")));
    }
    let mut points = vec![OperatingPoint::new(0.0, 0.0, max_current)?];
    let angles = angle_levels(n_angles);
    for k in 1..=n_amplitudes {
        let amp = max_current * k as f64 / n_amplitudes as f64;
        for &a in &angles {
            points.push(OperatingPoint::new(amp, a, max_current)?);
        }
    }
    Ok(OperatingPointGrid {
        max_current,
        n_amplitudes,
        n_angles,
        points,
    })
}

/// Builds the grid and checks it has exactly `n_op` points.
pub fn build_grid_checked(
    max_current: f64,
    n_amplitudes: usize,
    n_angles: usize,
    n_op: usize,
) -> Result<OperatingPointGrid> {
    if 1 + n_amplitudes * n_angles != n_op {
        return Err(Error::config(format!(
            "1 + {n_amplitudes} x {n_angles} != {n_op} operating points"
        )));
    }
    build_grid(max_current, n_amplitudes, n_angles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_37_points() {
        let g = build_grid_checked(1336.40, 6, 6, 37).unwrap();
        assert_eq!(g.len(), 37);
        let max = g.points.iter().map(|p| p.current).fold(0.0, f64::max);
        assert_eq!(max, 1336.40);
        assert_eq!(g.points[0].current, 0.0);
        assert_eq!(g.points.iter().filter(|p| p.current == 0.0).count(), 1);
        assert!(g.points.iter().all(|p| (0.0..=180.0).contains(&p.alpha)));
        assert_eq!(g.points[g.index(6, 5)], OperatingPoint { current: 1336.40, alpha: 180.0 });
    }

    #[test]
    fn minimal_grid() {
        let g = build_grid(100.0, 1, 1).unwrap();
        assert_eq!(g.points, vec![
            OperatingPoint { current: 0.0, alpha: 0.0 },
            OperatingPoint { current: 100.0, alpha: 0.0 },
        ]);
    }

    #[test]
    fn inconsistent_counts() {
        assert!(matches!(build_grid_checked(10.0, 6, 5, 37), Err(Error::Config(_))));
        assert!(build_grid(10.0, 0, 3).is_err());
    }

    #[test]
    fn points_satisfy_constructor_contract() {
        let g = build_grid(1336.4, 7, 9).unwrap();
        for p in &g.points {
            OperatingPoint::new(p.current, p.alpha, g.max_current).unwrap();
        }
    }
}
