//! Algebraic component models for positive-displacement machines, valves,
//! compressible pipe volumes, and rotary loads.
//!
//! Every operation is a pure function: parameters are given in the catalogue
//! units engineers quote (cc/rev, bar, (L/min)/bar, mm), while all flow/state
//! arguments and results are SI (m³/s, Pa, rad/s, N·m). The [`crate::units`]
//! module owns the conversions.

use serde::{Deserialize, Serialize};

use crate::units::{cc_per_rev_to_m3_per_rad, lpm_per_bar_to_si, pa_to_bar};

/// Below this shaft speed (rad/s) a load is treated as stationary for the
/// stiction test in [`load_acceleration`].
const STANDSTILL_BAND: f64 = 1e-4;

/// Fixed-displacement pump: ideal flow proportional to shaft speed, minus a
/// pressure-proportional slip (leakage) loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpParams {
    /// Displacement (cc/rev).
    pub displacement: f64,
    /// Slip coefficient ((L/min)/bar): leakage flow per unit pressure rise.
    pub slip_coeff: f64,
    /// Viscous friction torque coefficient (N·m per rad/s).
    pub visc_friction: f64,
    /// Pressure-dependent friction torque coefficient (N·m per bar).
    pub press_friction: f64,
}

/// Fixed-displacement motor; same loss structure as [`PumpParams`], with slip
/// adding to the intake demand and friction subtracting from shaft torque.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorParams {
    /// Displacement (cc/rev).
    pub displacement: f64,
    /// Slip coefficient ((L/min)/bar).
    pub slip_coeff: f64,
    /// Viscous friction torque coefficient (N·m per rad/s).
    pub visc_friction: f64,
    /// Pressure-dependent friction torque coefficient (N·m per bar).
    pub press_friction: f64,
}

/// Single-stage relief valve with a linear pressure/flow override law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliefValveParams {
    /// Cracking pressure (bar): no flow at or below this.
    pub cracking_pressure: f64,
    /// Override gradient ((L/min)/bar above cracking).
    pub gradient: f64,
}

/// Check valve: free flow above a small forward cracking pressure, fully
/// blocked in reverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckValveParams {
    /// Forward cracking pressure (bar).
    pub cracking_pressure: f64,
    /// Forward flow gradient ((L/min)/bar above cracking).
    pub gradient: f64,
}

/// Rigid pipe volume in which fluid compressibility integrates net inflow
/// into pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipeParams {
    /// Bore diameter (mm).
    pub diameter: f64,
    /// Length (m).
    pub length: f64,
    /// Effective fluid bulk modulus (Pa).
    pub bulk_modulus: f64,
    /// Absolute pressure floor (Pa) below which the fluid is treated as
    /// vaporizing: pressure stops falling instead of going negative.
    pub vapor_floor: f64,
}

impl PipeParams {
    /// Internal volume (m³) from bore and length.
    pub fn volume_m3(&self) -> f64 {
        let radius_m = self.diameter * 1e-3 / 2.0;
        std::f64::consts::PI * radius_m * radius_m * self.length
    }
}

/// Rotary inertial load with stiction, Coulomb, viscous, and windage friction
/// plus a constant applied (working) torque.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadParams {
    /// Moment of inertia (kg·m²).
    pub inertia: f64,
    /// Breakaway torque at standstill (N·m).
    pub stiction: f64,
    /// Coulomb (dry) friction torque (N·m).
    pub coulomb: f64,
    /// Viscous friction coefficient (N·m per rad/s).
    pub viscous: f64,
    /// Windage coefficient (N·m per (rad/s)²).
    pub windage: f64,
    /// Constant working torque the load must overcome (N·m).
    pub applied_torque: f64,
}

/// Prime mover that holds its shaft at constant speed regardless of torque.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimeMoverParams {
    /// Shaft speed (rpm).
    pub speed: f64,
}

/// Pump delivery (m³/s) at a shaft speed (rad/s) and pressure rise (Pa)
/// across the ports. Slip leaks back across the rise, so delivery can go
/// negative under extreme back-pressure.
pub fn pump_flow(p: &PumpParams, shaft_speed: f64, delta_p: f64) -> f64 {
    let disp = cc_per_rev_to_m3_per_rad(p.displacement);
    let slip = lpm_per_bar_to_si(p.slip_coeff);
    disp * shaft_speed - slip * delta_p
}

/// Motor port behavior at a shaft speed (rad/s) and pressure drop (Pa):
/// returns `(intake flow m³/s, shaft torque N·m)`. Slip adds to the intake
/// the motor draws; friction subtracts from the torque it delivers.
pub fn motor_behavior(m: &MotorParams, shaft_speed: f64, delta_p: f64) -> (f64, f64) {
    let disp = cc_per_rev_to_m3_per_rad(m.displacement);
    let slip = lpm_per_bar_to_si(m.slip_coeff);
    let intake = disp * shaft_speed + slip * delta_p;
    let torque = disp * delta_p - m.visc_friction * shaft_speed - m.press_friction * pa_to_bar(delta_p);
    (intake, torque)
}

/// Volumetric efficiency of a motor at an operating point: ideal displacement
/// flow over actual intake. Meaningful for positive speed and pressure drop.
pub fn volumetric_efficiency(m: &MotorParams, shaft_speed: f64, delta_p: f64) -> f64 {
    let ideal = cc_per_rev_to_m3_per_rad(m.displacement) * shaft_speed;
    let (intake, _) = motor_behavior(m, shaft_speed, delta_p);
    ideal / intake
}

/// Slip coefficient ((L/min)/bar) that yields a target volumetric efficiency
/// at a reference operating point (speed in rpm, pressure drop in bar).
///
/// Inverts the efficiency definition: slip flow = ideal·(1/η − 1), spread
/// over the reference pressure drop.
pub fn slip_for_target_efficiency(
    displacement: f64,
    speed_rpm: f64,
    delta_p_bar: f64,
    target_efficiency: f64,
) -> f64 {
    let ideal_lpm = displacement * speed_rpm / 1000.0;
    ideal_lpm * (1.0 / target_efficiency - 1.0) / delta_p_bar
}

/// Relief valve flow (m³/s) given upstream gauge pressure (Pa). Zero at or
/// below cracking, then linear in the excess; continuous at the opening point.
pub fn relief_valve_flow(v: &ReliefValveParams, p_upstream: f64) -> f64 {
    let excess = p_upstream - v.cracking_pressure * 1e5;
    if excess <= 0.0 {
        0.0
    } else {
        lpm_per_bar_to_si(v.gradient) * excess
    }
}

/// Check valve flow (m³/s) given the forward pressure difference (Pa). Never
/// negative: reverse flow is blocked outright.
pub fn check_valve_flow(v: &CheckValveParams, delta_p: f64) -> f64 {
    let excess = delta_p - v.cracking_pressure * 1e5;
    if excess <= 0.0 {
        0.0
    } else {
        lpm_per_bar_to_si(v.gradient) * excess
    }
}

/// Rate of pressure change (Pa/s) in a pipe volume from the net inflow
/// (m³/s): `dP/dt = β·Q/V`. When the pressure is at or below the vapor floor
/// and the net flow is outward, the rate clamps to zero so pressure cannot
/// fall into vacuum.
pub fn pipe_pressure_rate(p: &PipeParams, net_inflow: f64, pressure: f64) -> f64 {
    node_pressure_rate(p.bulk_modulus, p.vapor_floor, p.volume_m3(), net_inflow, pressure)
}

/// Same pressure-rate law for a lumped node whose fluid volume is given
/// directly (m³), e.g. a sized pipe plus a fixed manifold on the same node.
pub fn node_pressure_rate(
    bulk_modulus: f64,
    vapor_floor: f64,
    volume: f64,
    net_inflow: f64,
    pressure: f64,
) -> f64 {
    if pressure <= vapor_floor && net_inflow < 0.0 {
        return 0.0;
    }
    bulk_modulus * net_inflow / volume
}

/// Angular acceleration (rad/s²) of a load shaft given the driving torque
/// (N·m) and current speed (rad/s).
///
/// At standstill the shaft stays put until the drive exceeds both the applied
/// torque and the stiction margin; once moving, Coulomb, viscous, and windage
/// friction all oppose the direction of rotation.
pub fn load_acceleration(l: &LoadParams, net_torque: f64, speed: f64) -> f64 {
    if speed.abs() < STANDSTILL_BAND {
        let surplus = net_torque - l.applied_torque;
        if surplus.abs() <= l.stiction {
            return 0.0;
        }
        return surplus / l.inertia;
    }
    let drag = l.coulomb + l.viscous * speed.abs() + l.windage * speed * speed;
    (net_torque - speed.signum() * drag - l.applied_torque) / l.inertia
}
