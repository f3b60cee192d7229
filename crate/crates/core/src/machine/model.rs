//! Analytical dq-frame forward model standing in for the field solver.
//!
//! Lumped parameters (lengths in mm, `g_e = k_c g`):
//!
//! ```text
//! B_m    = B_r h_m / (h_m + mu_rec g_e)
//! psi_pm = N B_m (2 w_m L)                      magnet flux linkage
//! tau_p  = pi D_r / (2 p)                       pole pitch
//! base   = mu0 N^2 L tau_p
//! L_d    = c_d base / (g_e + h_m / mu_rec) + c_s mu0 N^2 L h_t / 10
//! L_q    = L_d + c_q base (1/g_e - 1/(g_e + h_m / mu_rec))
//! ```
//!
//! Per operating point, with `s = 1 / (1 + k_sat (I / I_sat)^2)`:
//!
//! ```text
//! psi_d = s (psi_pm + L_d i_d),  psi_q = L_q i_q
//! T     = 3/2 p (psi_d i_q - psi_q i_d) + zero-mean slot ripple (orders 6, 12)
//! B     = B_sat tanh(sqrt((s psi_pm)^2 + (s L_d i_d)^2 + (L_q i_q)^2) / (N A_pole) / B_sat)
//! E_hyst = k_h B^2 m_iron,  E_eddy = k_e B^2 f_ref m_iron   (J per period)
//! ```

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::mass::mass_and_cost;
use super::params::{DesignParams, DesignRanges, OperatingPoint, SystemParams};
use crate::error::{Error, Result};

const MU0: f64 = 4e-7 * PI;

/// Tunable constants of the synthetic machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSettings {
    pub carter_factor: f64,
    pub recoil_permeability: f64,
    pub d_axis_coeff: f64,
    pub q_axis_coeff: f64,
    pub leakage_coeff: f64,
    /// Strength of the d-axis saturation factor; zero disables saturation.
    pub k_sat: f64,
    pub i_sat: f64,
    pub ripple_enabled: bool,
    /// Ripple amplitudes in Nm at max current, 1 mm air gap, alpha = 0.
    pub ripple_6: f64,
    pub ripple_12: f64,
    pub b_sat: f64,
    pub stator_loss_share: f64,
    /// Mechanical speed at which the per-period loss energies are evaluated.
    pub loss_reference_speed: f64,
    /// When set, `L_q` is forced equal to `L_d` (non-salient machine).
    pub force_non_salient: bool,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings {
            carter_factor: 1.1,
            recoil_permeability: 1.05,
            d_axis_coeff: 0.23,
            q_axis_coeff: 0.06,
            leakage_coeff: 0.5,
            k_sat: 0.2,
            i_sat: 1336.40,
            ripple_enabled: true,
            ripple_6: 40.0,
            ripple_12: 25.0,
            b_sat: 1.8,
            stator_loss_share: 0.6,
            loss_reference_speed: 3000.0,
            force_non_salient: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RippleHarmonic {
    /// Harmonic order in electrical angle.
    pub order: u32,
    /// Amplitude in Nm at `max_current` and `alpha = 0`.
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LumpedParams {
    pub psi_pm: f64,
    pub l_d: f64,
    pub l_q: f64,
    pub ripple_harmonics: Vec<RippleHarmonic>,
    /// Flux-carrying pole area in m², used for the flux-density proxy.
    pub pole_area: f64,
    pub turns: f64,
    pub resistance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossComponents {
    pub eddy_rotor: f64,
    pub eddy_stator: f64,
    pub hyst_rotor: f64,
    pub hyst_stator: f64,
}

impl LossComponents {
    pub const NAMES: [&'static str; 4] = ["eddy_rotor", "eddy_stator", "hyst_rotor", "hyst_stator"];

    pub fn to_array(self) -> [f64; 4] {
        [self.eddy_rotor, self.eddy_stator, self.hyst_rotor, self.hyst_stator]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        LossComponents {
            eddy_rotor: a[0],
            eddy_stator: a[1],
            hyst_rotor: a[2],
            hyst_stator: a[3],
        }
    }

    pub fn hysteresis(&self) -> f64 {
        self.hyst_rotor + self.hyst_stator
    }

    pub fn eddy(&self) -> f64 {
        self.eddy_rotor + self.eddy_stator
    }
}

/// Per-operating-point solver outputs: one electrical period of torque and
/// coil flux linkages, plus the iron-loss energies per period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntermediateMeasures {
    pub torque: Vec<f64>,
    pub flux: [Vec<f64>; 3],
    pub losses: LossComponents,
}

impl IntermediateMeasures {
    pub fn n_steps(&self) -> usize {
        self.torque.len()
    }

    /// Width of the flat layout `[losses(4), torque, flux1, flux2, flux3]`.
    pub fn flat_len(n_steps: usize) -> usize {
        4 + 4 * n_steps
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::flat_len(self.n_steps()));
        v.extend_from_slice(&self.losses.to_array());
        v.extend_from_slice(&self.torque);
        for f in &self.flux {
            v.extend_from_slice(f);
        }
        v
    }

    pub fn from_flat(v: &[f64], n_steps: usize) -> Result<Self> {
        let need = Self::flat_len(n_steps);
        if v.len() != need {
            return Err(Error::Shape {
                context: "flat measures",
                expected: need,
                got: v.len(),
            });
        }
        let chunk = |k: usize| v[4 + k * n_steps..4 + (k + 1) * n_steps].to_vec();
        Ok(IntermediateMeasures {
            losses: LossComponents::from_array([v[0], v[1], v[2], v[3]]),
            torque: chunk(0),
            flux: [chunk(1), chunk(2), chunk(3)],
        })
    }

    pub fn mean_torque(&self) -> f64 {
        self.torque.iter().sum::<f64>() / self.torque.len() as f64
    }
}

/// Electrical rotor angle of sample `k` out of `n` over one period.
pub fn step_angle(k: usize, n: usize) -> f64 {
    TAU * k as f64 / n as f64
}

/// The synthetic machine: system parameters, design ranges and model constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MachineModel {
    pub system: SystemParams,
    pub ranges: DesignRanges,
    pub settings: ModelSettings,
}

impl MachineModel {
    pub fn new(system: SystemParams, ranges: DesignRanges, settings: ModelSettings) -> Result<Self> {
        system.validate()?;
        ranges.validate()?;
        Ok(MachineModel {
            system,
            ranges,
            settings,
        })
    }

    /// Electrical frequency (Hz) at which loss energies are tabulated.
    pub fn reference_frequency(&self) -> f64 {
        self.settings.loss_reference_speed / 60.0 * self.system.pole_pairs as f64
    }

    pub fn derive_lumped_parameters(&self, p: &DesignParams) -> Result<LumpedParams> {
        self.ranges.check(p)?;
        let st = &self.settings;
        let pp = self.system.pole_pairs as f64;
        let len_m = p.stack_length * 1e-3;
        let g_e = st.carter_factor * p.air_gap;
        let magnet_gap = p.magnet_height / st.recoil_permeability;

        let b_m = p.magnet_remanence * p.magnet_height
            / (p.magnet_height + st.recoil_permeability * g_e);
        let pole_area = 2.0 * p.magnet_width * p.stack_length * 1e-6;
        let psi_pm = p.winding_turns * b_m * pole_area;

        let tau_p = PI * p.rotor_outer_diameter / (2.0 * pp);
        let n2 = p.winding_turns * p.winding_turns;
        let base = MU0 * n2 * len_m * tau_p;
        let leakage = st.leakage_coeff * MU0 * n2 * len_m * p.tooth_head_height / 10.0;
        let l_d = st.d_axis_coeff * base / (g_e + magnet_gap) + leakage;
        let l_q = if st.force_non_salient {
            l_d
        } else {
            l_d + st.q_axis_coeff * base * (1.0 / g_e - 1.0 / (g_e + magnet_gap))
        };

        let ripple_harmonics = if st.ripple_enabled {
            // Pole-arc dependence of the slot harmonics.
            let arc = 0.7 + 0.3 * (TAU * p.magnet_width / 10.0).cos();
            vec![
                RippleHarmonic {
                    order: 6,
                    amplitude: st.ripple_6 * arc / p.air_gap,
                    phase: 0.0,
                },
                RippleHarmonic {
                    order: 12,
                    amplitude: st.ripple_12 * arc / p.air_gap,
                    phase: PI / 4.0,
                },
            ]
        } else {
            Vec::new()
        };

        Ok(LumpedParams {
            psi_pm,
            l_d,
            l_q,
            ripple_harmonics,
            pole_area,
            turns: p.winding_turns,
            resistance: p.stator_resistance,
        })
    }

    fn saturation(&self, current: f64) -> f64 {
        let r = current / self.settings.i_sat;
        1.0 / (1.0 + self.settings.k_sat * r * r)
    }

    /// dq flux linkages at an operating point.
    pub fn dq_flux(&self, lp: &LumpedParams, op: &OperatingPoint) -> (f64, f64) {
        let (i_d, i_q) = op.id_iq();
        let s = self.saturation(op.current);
        (s * (lp.psi_pm + lp.l_d * i_d), lp.l_q * i_q)
    }

    /// Mean electromagnetic torque consistent with the dq flux linkages.
    pub fn mean_torque(&self, lp: &LumpedParams, op: &OperatingPoint) -> f64 {
        let (i_d, i_q) = op.id_iq();
        let (psi_d, psi_q) = self.dq_flux(lp, op);
        1.5 * self.system.pole_pairs as f64 * (psi_d * i_q - psi_q * i_d)
    }

    /// Envelope of harmonic `order` at an operating point. Even in alpha.
    fn ripple_amplitude(&self, h: &RippleHarmonic, op: &OperatingPoint) -> f64 {
        let c2 = (2.0 * op.alpha.to_radians()).cos();
        let shape = match h.order {
            6 => 0.75 + 0.25 * c2,
            _ => 0.6 - 0.4 * c2,
        };
        h.amplitude * op.current / self.system.max_current * shape
    }

    fn losses(&self, p: &DesignParams, lp: &LumpedParams, op: &OperatingPoint) -> LossComponents {
        let (i_d, i_q) = op.id_iq();
        let s = self.saturation(op.current);
        let a = s * lp.psi_pm;
        let b = s * lp.l_d * i_d;
        let c = lp.l_q * i_q;
        let b_raw = (a * a + b * b + c * c).sqrt() / (lp.turns * lp.pole_area);
        let b_sat = self.settings.b_sat;
        let b_eff = b_sat * (b_raw / b_sat).tanh();
        let b2 = b_eff * b_eff;

        let iron = mass_and_cost(p, &self.system).mass_per_part.iron();
        let hyst = p.lamination_loss_coeff_hyst * b2 * iron;
        let eddy = p.lamination_loss_coeff_eddy * b2 * self.reference_frequency() * iron;
        let k = self.settings.stator_loss_share;
        LossComponents {
            eddy_rotor: (1.0 - k) * eddy,
            eddy_stator: k * eddy,
            hyst_rotor: (1.0 - k) * hyst,
            hyst_stator: k * hyst,
        }
    }

    pub fn simulate(
        &self,
        p: &DesignParams,
        op: &OperatingPoint,
        n_steps: usize,
    ) -> Result<IntermediateMeasures> {
        if n_steps < 2 {
            return Err(Error::config(format!("n_steps must be >= 2, got {n_steps}")));
        }
        let op = OperatingPoint::new(op.current, op.alpha, self.system.max_current)?;
        let lp = self.derive_lumped_parameters(p)?;
        let (psi_d, psi_q) = self.dq_flux(&lp, &op);
        let t_mean = self.mean_torque(&lp, &op);

        let thetas: Vec<f64> = (0..n_steps).map(|k| step_angle(k, n_steps)).collect();
        let mut ripple: Vec<f64> = thetas
            .iter()
            .map(|&th| {
                lp.ripple_harmonics
                    .iter()
                    .map(|h| self.ripple_amplitude(h, &op) * (h.order as f64 * th + h.phase).sin())
                    .sum::<f64>()
            })
            .collect();
        // Remove the sampled mean so the waveform average is exactly T_mean
        // for any step count.
        let bias = ripple.iter().sum::<f64>() / n_steps as f64;
        ripple.iter_mut().for_each(|r| *r -= bias);
        let torque = ripple.iter().map(|r| t_mean + r).collect();

        let flux = std::array::from_fn(|k| {
            let shift = TAU * k as f64 / 3.0;
            thetas
                .iter()
                .map(|&th| psi_d * (th - shift).cos() - psi_q * (th - shift).sin())
                .collect()
        });

        Ok(IntermediateMeasures {
            torque,
            flux,
            losses: self.losses(p, &lp, &op),
        })
    }
}
