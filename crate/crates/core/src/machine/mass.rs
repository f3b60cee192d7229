//! Active-part masses and material cost from a simplified geometry.
//!
//! Stator: annulus from `D_r + 2g` to `D_r + 2g + 2(h_t + BACK_DEPTH)`. The
//! inner `h_t` ring holds the slots; `SLOT_FRACTION` of it is slot area and
//! `FILL_FACTOR` of the slot area is copper. Rotor: annulus from
//! `SHAFT_RATIO * D_r` to `D_r` minus the magnet pockets. Magnets:
//! `MAGNETS_PER_POLE` rectangular bars `h_m x w_m x L` per pole. Every volume
//! is linear in the stack length.

use serde::{Deserialize, Serialize};

use super::params::{DesignParams, SystemParams};

/// Radial depth of slot bottom plus yoke behind the tooth region, mm.
pub const BACK_DEPTH: f64 = 30.0;
pub const SLOT_FRACTION: f64 = 0.45;
pub const FILL_FACTOR: f64 = 0.45;
pub const SHAFT_RATIO: f64 = 0.4;
pub const MAGNETS_PER_POLE: f64 = 2.0;

const MM3_TO_M3: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartMasses {
    pub stator_core: f64,
    pub rotor_core: f64,
    pub winding: f64,
    pub magnets: f64,
}

impl PartMasses {
    pub fn total(&self) -> f64 {
        self.stator_core + self.rotor_core + self.winding + self.magnets
    }

    pub fn iron(&self) -> f64 {
        self.stator_core + self.rotor_core
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassCost {
    pub mass_per_part: PartMasses,
    pub total_mass: f64,
    pub total_cost: f64,
}

/// Part volumes in m³: (stator core, rotor core, copper, magnets).
pub fn part_volumes(p: &DesignParams, s: &SystemParams) -> (f64, f64, f64, f64) {
    use std::f64::consts::FRAC_PI_4;
    let len = p.stack_length;
    let d_si = p.rotor_outer_diameter + 2.0 * p.air_gap;
    let d_teeth = d_si + 2.0 * p.tooth_head_height;
    let d_so = d_teeth + 2.0 * BACK_DEPTH;

    let stator_annulus = FRAC_PI_4 * (d_so * d_so - d_si * d_si) * len;
    let slots = SLOT_FRACTION * FRAC_PI_4 * (d_teeth * d_teeth - d_si * d_si) * len;
    let copper = FILL_FACTOR * slots;

    let poles = 2.0 * s.pole_pairs as f64;
    let magnets = MAGNETS_PER_POLE * poles * p.magnet_height * p.magnet_width * len;
    let d_r = p.rotor_outer_diameter;
    let d_sh = SHAFT_RATIO * d_r;
    let rotor = FRAC_PI_4 * (d_r * d_r - d_sh * d_sh) * len - magnets;

    (
        (stator_annulus - slots) * MM3_TO_M3,
        rotor * MM3_TO_M3,
        copper * MM3_TO_M3,
        magnets * MM3_TO_M3,
    )
}

pub fn mass_and_cost(p: &DesignParams, s: &SystemParams) -> MassCost {
    let (v_st, v_rt, v_cu, v_pm) = part_volumes(p, s);
    let rho = s.material_densities;
    let price = s.material_unit_prices;
    let parts = PartMasses {
        stator_core: v_st * rho.lamination,
        rotor_core: v_rt * rho.lamination,
        winding: v_cu * rho.copper,
        magnets: v_pm * rho.magnet,
    };
    let total_cost = parts.iron() * price.lamination
        + parts.winding * price.copper
        + parts.magnets * price.magnet;
    MassCost {
        mass_per_part: parts,
        total_mass: parts.total(),
        total_cost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::params::{DesignRanges, Materials};

    #[test]
    fn zero_prices_zero_cost() {
        let mut s = SystemParams::default();
        s.material_unit_prices = Materials {
            lamination: 0.0,
            copper: 0.0,
            magnet: 0.0,
        };
        let mc = mass_and_cost(&DesignRanges::default().midpoint(), &s);
        assert_eq!(mc.total_cost, 0.0);
        assert!(mc.total_mass > 0.0);
    }

    #[test]
    fn doubling_length_doubles_mass() {
        let s = SystemParams::default();
        let p = DesignRanges::default().midpoint();
        let mut q = p.clone();
        q.stack_length *= 2.0;
        let a = mass_and_cost(&p, &s);
        let b = mass_and_cost(&q, &s);
        assert!((b.total_mass / a.total_mass - 2.0).abs() < 1e-14);
        assert!((b.total_cost / a.total_cost - 2.0).abs() < 1e-14);
    }

    #[test]
    fn midpoint_masses_match_hand_computation() {
        // Frozen from an independent evaluation of the volume formulas at
        // the centre of the default ranges.
        let mc = mass_and_cost(&DesignRanges::default().midpoint(), &SystemParams::default());
        let m = mc.mass_per_part;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
        assert!(close(m.stator_core, STATOR_CORE), "{}", m.stator_core);
        assert!(close(m.rotor_core, ROTOR_CORE), "{}", m.rotor_core);
        assert!(close(m.winding, WINDING), "{}", m.winding);
        assert!(close(m.magnets, MAGNETS), "{}", m.magnets);
        assert!(close(mc.total_mass, TOTAL_MASS), "{}", mc.total_mass);
        assert!(close(mc.total_cost, TOTAL_COST), "{}", mc.total_cost);
    }

    const STATOR_CORE: f64 = 30.22196896029011;
    const ROTOR_CORE: f64 = 18.469828482855316;
    const WINDING: f64 = 2.4527503979226313;
    const MAGNETS: f64 = 1.3706550000000002;
    const TOTAL_MASS: f64 = 52.51520284106805;
    const TOTAL_COST: f64 = 260.30992218916725;
}
