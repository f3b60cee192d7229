//! dq maps over the operating-point lattice and their interpolation.
//!
//! Scalar maps (mean torque, ripple, loss energies) are bilinear in
//! `(I, alpha)`. Flux linkages are interpolated in the frame of the current
//! vector: with `e = (-sin a, cos a)` and `f = (cos a, sin a)`, the nodes
//! store `par = (psi - psi0) . e` and `perp = (psi - psi0) . f`, which are
//! bilinear in `(I, alpha)` and exactly linear in `I` for a linear machine
//! with `L_d = L_q`. Queries with `alpha > 180` are mirrored to `360 - alpha`,
//! and all queries are clamped to the lattice hull.

use ndarray::Array2;

use super::park::park_mean;
use crate::dataset::OperatingPointGrid;
use crate::error::{Error, Result};
use crate::machine::{step_angle, IntermediateMeasures, LossComponents};

#[derive(Debug, Clone, PartialEq)]
pub struct DqMaps {
    /// Ascending amplitude levels (A), starting at 0.
    pub amplitudes: Vec<f64>,
    /// Ascending angle levels (deg) within [0, 180].
    pub angles: Vec<f64>,
    /// Flux linkage at zero current.
    pub psi0: (f64, f64),
    pub psi_d: Array2<f64>,
    pub psi_q: Array2<f64>,
    pub torque_mean: Array2<f64>,
    pub torque_ripple: Array2<f64>,
    /// Loss energies per period in [`LossComponents::NAMES`] order.
    pub losses: [Array2<f64>; 4],
    par: Array2<f64>,
    perp: Array2<f64>,
    pub resistance: f64,
    pub pole_pairs: u32,
    /// Electrical frequency (Hz) of the tabulated loss energies.
    pub f_ref: f64,
}

/// Interpolated quantities at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSample {
    pub psi_d: f64,
    pub psi_q: f64,
    pub torque: f64,
    pub ripple: f64,
    pub losses: LossComponents,
}

fn locate(levels: &[f64], x: f64) -> (usize, f64) {
    let n = levels.len();
    if n == 1 || x <= levels[0] {
        return (0, 0.0);
    }
    if x >= levels[n - 1] {
        return (n - 2, 1.0);
    }
    let i = levels.partition_point(|&l| l <= x).saturating_sub(1).min(n - 2);
    (i, (x - levels[i]) / (levels[i + 1] - levels[i]))
}

/// Cell corner indices and weights for a query.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    i: usize,
    j: usize,
    i1: usize,
    j1: usize,
    u: f64,
    v: f64,
}

impl Stencil {
    fn eval(&self, m: &Array2<f64>) -> f64 {
        let (a, b) = (m[[self.i, self.j]], m[[self.i, self.j1]]);
        let (c, d) = (m[[self.i1, self.j]], m[[self.i1, self.j1]]);
        let lo = a + (b - a) * self.v;
        let hi = c + (d - c) * self.v;
        lo + (hi - lo) * self.u
    }
}

/// Folds an angle in degrees onto the [0, 180] half-plane.
pub fn mirror_alpha(alpha: f64) -> f64 {
    let a = alpha.rem_euclid(360.0);
    if a > 180.0 {
        360.0 - a
    } else {
        a
    }
}

pub fn ripple_of(w: &[f64]) -> f64 {
    let hi = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

pub fn build_maps(
    measures: &[IntermediateMeasures],
    grid: &OperatingPointGrid,
    resistance: f64,
    pole_pairs: u32,
    f_ref: f64,
) -> Result<DqMaps> {
    if measures.len() != grid.len() {
        return Err(Error::Shape {
            context: "measures per grid",
            expected: grid.len(),
            got: measures.len(),
        });
    }
    let amplitudes = grid.amplitudes();
    let angles = grid.angles();
    let shape = (amplitudes.len(), angles.len());
    let n_steps = measures[0].n_steps();
    let thetas: Vec<f64> = (0..n_steps).map(|k| step_angle(k, n_steps)).collect();

    let mut psi_d = Array2::zeros(shape);
    let mut psi_q = Array2::zeros(shape);
    let mut torque_mean = Array2::zeros(shape);
    let mut torque_ripple = Array2::zeros(shape);
    let mut losses: [Array2<f64>; 4] = std::array::from_fn(|_| Array2::zeros(shape));
    let mut par = Array2::zeros(shape);
    let mut perp = Array2::zeros(shape);

    let dq = |m: &IntermediateMeasures| park_mean([&m.flux[0], &m.flux[1], &m.flux[2]], &thetas);
    let psi0 = dq(&measures[0])?;
    for a in 0..shape.0 {
        for j in 0..shape.1 {
            let m = &measures[grid.index(a, j)];
            if m.n_steps() != n_steps {
                return Err(Error::Shape {
                    context: "waveform length",
                    expected: n_steps,
                    got: m.n_steps(),
                });
            }
            let (d, q) = dq(m)?;
            psi_d[[a, j]] = d;
            psi_q[[a, j]] = q;
            torque_mean[[a, j]] = m.mean_torque();
            torque_ripple[[a, j]] = ripple_of(&m.torque);
            for (k, v) in m.losses.to_array().into_iter().enumerate() {
                losses[k][[a, j]] = v;
            }
            let al = angles[j].to_radians();
            let (dd, dq_) = (d - psi0.0, q - psi0.1);
            if a > 0 {
                par[[a, j]] = -dd * al.sin() + dq_ * al.cos();
                perp[[a, j]] = dd * al.cos() + dq_ * al.sin();
            }
        }
    }
    Ok(DqMaps {
        amplitudes,
        angles,
        psi0,
        psi_d,
        psi_q,
        torque_mean,
        torque_ripple,
        losses,
        par,
        perp,
        resistance,
        pole_pairs,
        f_ref,
    })
}

impl DqMaps {
    pub fn max_current(&self) -> f64 {
        *self.amplitudes.last().unwrap()
    }

    fn stencil(&self, current: f64, alpha: f64) -> Stencil {
        let (i, u) = locate(&self.amplitudes, current);
        let (j, v) = locate(&self.angles, mirror_alpha(alpha));
        let i1 = (i + 1).min(self.amplitudes.len() - 1);
        let j1 = (j + 1).min(self.angles.len() - 1);
        Stencil { i, j, i1, j1, u, v }
    }

    pub fn flux(&self, current: f64, alpha: f64) -> (f64, f64) {
        let s = self.stencil(current, alpha);
        let a = mirror_alpha(alpha).clamp(0.0, 180.0).to_radians();
        let par = s.eval(&self.par);
        let perp = s.eval(&self.perp);
        (
            self.psi0.0 - par * a.sin() + perp * a.cos(),
            self.psi0.1 + par * a.cos() + perp * a.sin(),
        )
    }

    pub fn torque(&self, current: f64, alpha: f64) -> f64 {
        self.stencil(current, alpha).eval(&self.torque_mean)
    }

    pub fn ripple(&self, current: f64, alpha: f64) -> f64 {
        self.stencil(current, alpha).eval(&self.torque_ripple)
    }

    pub fn losses(&self, current: f64, alpha: f64) -> LossComponents {
        let s = self.stencil(current, alpha);
        LossComponents::from_array(std::array::from_fn(|k| s.eval(&self.losses[k])))
    }

    pub fn sample(&self, current: f64, alpha: f64) -> MapSample {
        let (psi_d, psi_q) = self.flux(current, alpha);
        let s = self.stencil(current, alpha);
        MapSample {
            psi_d,
            psi_q,
            torque: s.eval(&self.torque_mean),
            ripple: s.eval(&self.torque_ripple),
            losses: LossComponents::from_array(std::array::from_fn(|k| s.eval(&self.losses[k]))),
        }
    }

    /// Electrical angular frequency (rad/s) at a mechanical speed (rpm).
    pub fn omega_e(&self, rpm: f64) -> f64 {
        2.0 * std::f64::consts::PI * rpm / 60.0 * self.pole_pairs as f64
    }

    /// Steady-state dq voltages `(u_d, u_q)`.
    pub fn voltage_dq(&self, current: f64, alpha: f64, rpm: f64) -> (f64, f64) {
        let a = alpha.to_radians();
        let (i_d, i_q) = (-current * a.sin(), current * a.cos());
        let (psi_d, psi_q) = self.flux(current, alpha);
        let w = self.omega_e(rpm);
        (
            self.resistance * i_d - w * psi_q,
            self.resistance * i_q + w * psi_d,
        )
    }

    pub fn voltage_magnitude(&self, current: f64, alpha: f64, rpm: f64) -> f64 {
        let (u_d, u_q) = self.voltage_dq(current, alpha, rpm);
        u_d.hypot(u_q)
    }

    /// Iron-loss power split `(hysteresis, eddy)` in W at a mechanical speed.
    pub fn iron_loss_power(&self, losses: &LossComponents, rpm: f64) -> (f64, f64) {
        let f = rpm / 60.0 * self.pole_pairs as f64;
        (losses.hysteresis() * f, losses.eddy() * f * f / self.f_ref)
    }
}
