//! Design, system and operating-point parameter types.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval used for every sampled design field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Range { min, max }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min <= self.max
    }
}

/// Names of the physically meaningful design fields, in feature-vector order.
pub const NAMED_FIELDS: [&str; 11] = [
    "air_gap",
    "magnet_height",
    "magnet_width",
    "tooth_head_height",
    "rotor_outer_diameter",
    "stack_length",
    "magnet_remanence",
    "lamination_loss_coeff_hyst",
    "lamination_loss_coeff_eddy",
    "winding_turns",
    "stator_resistance",
];

pub const N_NAMED: usize = NAMED_FIELDS.len();

/// One machine design.
///
/// Lengths are in mm. The loss coefficients are per kilogram of lamination:
/// hysteresis energy per period in J/(T²·kg), eddy energy per period in
/// J/(T²·Hz·kg). `winding_turns` is the effective series turns per phase
/// (winding factor included), which is why it is not restricted to integers.
/// `nuisance` pads the feature vector to the configured dimension and has no
/// influence on the machine model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub air_gap: f64,
    pub magnet_height: f64,
    pub magnet_width: f64,
    pub tooth_head_height: f64,
    pub rotor_outer_diameter: f64,
    pub stack_length: f64,
    pub magnet_remanence: f64,
    pub lamination_loss_coeff_hyst: f64,
    pub lamination_loss_coeff_eddy: f64,
    pub winding_turns: f64,
    pub stator_resistance: f64,
    #[serde(default)]
    pub nuisance: Vec<f64>,
}

impl DesignParams {
    pub fn named(&self) -> [f64; N_NAMED] {
        [
            self.air_gap,
            self.magnet_height,
            self.magnet_width,
            self.tooth_head_height,
            self.rotor_outer_diameter,
            self.stack_length,
            self.magnet_remanence,
            self.lamination_loss_coeff_hyst,
            self.lamination_loss_coeff_eddy,
            self.winding_turns,
            self.stator_resistance,
        ]
    }

    fn named_mut(&mut self) -> [&mut f64; N_NAMED] {
        [
            &mut self.air_gap,
            &mut self.magnet_height,
            &mut self.magnet_width,
            &mut self.tooth_head_height,
            &mut self.rotor_outer_diameter,
            &mut self.stack_length,
            &mut self.magnet_remanence,
            &mut self.lamination_loss_coeff_hyst,
            &mut self.lamination_loss_coeff_eddy,
            &mut self.winding_turns,
            &mut self.stator_resistance,
        ]
    }

    /// Feature vector of length `N_NAMED + nuisance.len()`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = self.named().to_vec();
        v.extend_from_slice(&self.nuisance);
        v
    }

    pub fn from_vector(v: &[f64]) -> Result<Self> {
        if v.len() < N_NAMED {
            return Err(Error::Shape {
                context: "design vector",
                expected: N_NAMED,
                got: v.len(),
            });
        }
        let mut p = DesignParams {
            air_gap: 0.0,
            magnet_height: 0.0,
            magnet_width: 0.0,
            tooth_head_height: 0.0,
            rotor_outer_diameter: 0.0,
            stack_length: 0.0,
            magnet_remanence: 0.0,
            lamination_loss_coeff_hyst: 0.0,
            lamination_loss_coeff_eddy: 0.0,
            winding_turns: 0.0,
            stator_resistance: 0.0,
            nuisance: v[N_NAMED..].to_vec(),
        };
        for (slot, &x) in p.named_mut().into_iter().zip(v) {
            *slot = x;
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        N_NAMED + self.nuisance.len()
    }
}

/// Sampling ranges for every design field plus the padded dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignRanges {
    pub air_gap: Range,
    pub magnet_height: Range,
    pub magnet_width: Range,
    pub tooth_head_height: Range,
    pub rotor_outer_diameter: Range,
    pub stack_length: Range,
    pub magnet_remanence: Range,
    pub lamination_loss_coeff_hyst: Range,
    pub lamination_loss_coeff_eddy: Range,
    pub winding_turns: Range,
    pub stator_resistance: Range,
    pub nuisance: Range,
    /// Total design-vector dimension; the remainder after the named fields
    /// is nuisance padding.
    pub dim: usize,
}

impl Default for DesignRanges {
    fn default() -> Self {
        DesignRanges {
            air_gap: Range::new(0.50, 2.00),
            magnet_height: Range::new(2.23, 7.00),
            magnet_width: Range::new(8.00, 25.00),
            tooth_head_height: Range::new(12.00, 20.00),
            rotor_outer_diameter: Range::new(159.00, 165.00),
            stack_length: Range::new(120.0, 180.0),
            magnet_remanence: Range::new(1.15, 1.35),
            lamination_loss_coeff_hyst: Range::new(0.015, 0.030),
            lamination_loss_coeff_eddy: Range::new(5.0e-5, 1.5e-4),
            winding_turns: Range::new(10.0, 16.0),
            stator_resistance: Range::new(0.002, 0.008),
            nuisance: Range::new(0.0, 1.0),
            dim: 35,
        }
    }
}

impl DesignRanges {
    pub fn named(&self) -> [Range; N_NAMED] {
        [
            self.air_gap,
            self.magnet_height,
            self.magnet_width,
            self.tooth_head_height,
            self.rotor_outer_diameter,
            self.stack_length,
            self.magnet_remanence,
            self.lamination_loss_coeff_hyst,
            self.lamination_loss_coeff_eddy,
            self.winding_turns,
            self.stator_resistance,
        ]
    }

    pub fn n_nuisance(&self) -> usize {
        self.dim.saturating_sub(N_NAMED)
    }

    /// Ranges for every entry of the feature vector, nuisance included.
    pub fn per_feature(&self) -> Vec<Range> {
        let mut r = self.named().to_vec();
        r.extend(std::iter::repeat_n(self.nuisance, self.n_nuisance()));
        r
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < N_NAMED {
            return Err(Error::config(format!(
                "design dimension {} smaller than the {} named fields",
                self.dim, N_NAMED
            )));
        }
        let names = NAMED_FIELDS.iter().copied().chain(std::iter::once("nuisance"));
        let ranges = self.named().into_iter().chain(std::iter::once(self.nuisance));
        for (name, r) in names.zip(ranges) {
            if !r.is_valid() {
                return Err(Error::config(format!(
                    "empty or non-finite range for `{name}`: [{}, {}]",
                    r.min, r.max
                )));
            }
        }
        Ok(())
    }

    /// Range check on the named fields. Nuisance entries are unconstrained
    /// because the model ignores them.
    pub fn check(&self, p: &DesignParams) -> Result<()> {
        for ((name, r), x) in NAMED_FIELDS.iter().zip(self.named()).zip(p.named()) {
            if !r.contains(x) {
                return Err(Error::Range {
                    field: (*name).to_string(),
                    value: x,
                    min: r.min,
                    max: r.max,
                });
            }
        }
        Ok(())
    }

    /// Design at the centre of every range.
    pub fn midpoint(&self) -> DesignParams {
        let v: Vec<f64> = self.per_feature().iter().map(Range::mid).collect();
        DesignParams::from_vector(&v).expect("dim >= N_NAMED")
    }
}

/// Per-material scalar table (unit prices in €/kg or densities in kg/m³).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Materials {
    pub lamination: f64,
    pub copper: f64,
    pub magnet: f64,
}

/// Fixed system parameters shared by every design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub dc_voltage: f64,
    pub pole_pairs: u32,
    pub slots_per_pole_per_phase: u32,
    pub max_current: f64,
    pub max_speed: f64,
    pub material_unit_prices: Materials,
    pub material_densities: Materials,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            dc_voltage: 640.0,
            pole_pairs: 4,
            slots_per_pole_per_phase: 2,
            max_current: 1336.40,
            max_speed: 20000.0,
            material_unit_prices: Materials {
                lamination: 2.5,
                copper: 9.0,
                magnet: 85.0,
            },
            material_densities: Materials {
                lamination: 7650.0,
                copper: 8900.0,
                magnet: 7500.0,
            },
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dc_voltage", self.dc_voltage),
            ("max_current", self.max_current),
            ("max_speed", self.max_speed),
            ("material_densities.lamination", self.material_densities.lamination),
            ("material_densities.copper", self.material_densities.copper),
            ("material_densities.magnet", self.material_densities.magnet),
        ];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {x}")));
            }
        }
        let prices = self.material_unit_prices;
        for (name, x) in [
            ("lamination", prices.lamination),
            ("copper", prices.copper),
            ("magnet", prices.magnet),
        ] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::config(format!(
                    "material_unit_prices.{name} must be non-negative, got {x}"
                )));
            }
        }
        if self.pole_pairs == 0 || self.slots_per_pole_per_phase == 0 {
            return Err(Error::config("pole_pairs and slots_per_pole_per_phase must be >= 1"));
        }
        Ok(())
    }

    /// Phase voltage amplitude limit under space-vector modulation.
    pub fn voltage_limit(&self) -> f64 {
        self.dc_voltage / 3f64.sqrt()
    }

    /// Electrical angular frequency in rad/s at a mechanical speed in rpm.
    pub fn electrical_omega(&self, rpm: f64) -> f64 {
        2.0 * std::f64::consts::PI * rpm / 60.0 * self.pole_pairs as f64
    }

    pub fn mechanical_omega(rpm: f64) -> f64 {
        2.0 * std::f64::consts::PI * rpm / 60.0
    }
}

/// Electrical excitation: phase-current amplitude (A) and control angle (deg).
///
/// Convention: `i_d = -I sin(alpha)`, `i_q = I cos(alpha)`, so `alpha = 0` is
/// pure q-axis (torque-producing) current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub current: f64,
    pub alpha: f64,
}

impl OperatingPoint {
    pub fn new(current: f64, alpha: f64, max_current: f64) -> Result<Self> {
        if !(current.is_finite() && (0.0..=max_current).contains(&current)) {
            return Err(Error::Range {
                field: "current".into(),
                value: current,
                min: 0.0,
                max: max_current,
            });
        }
        if !(alpha.is_finite() && (0.0..360.0).contains(&alpha)) {
            return Err(Error::Range {
                field: "alpha".into(),
                value: alpha,
                min: 0.0,
                max: 360.0,
            });
        }
        Ok(OperatingPoint { current, alpha })
    }

    pub fn id_iq(&self) -> (f64, f64) {
        let a = self.alpha.to_radians();
        (-self.current * a.sin(), self.current * a.cos())
    }
}
