//! The two transmission circuits under study, their design spaces, the
//! scalar objectives that score a sized design, and slip calibration.
//!
//! Circuit A is a simple closed loop: a fixed-speed prime mover drives a
//! variable-size pump feeding a motor through a sized supply pipe, with a
//! relief valve protecting the supply line and a return pipe back to the
//! pump. The three design variables are pump displacement, motor
//! displacement, and pipe diameter.
//!
//! Circuit B is a boosted closed loop with a known motor and load: a main
//! pump drives the motor while a boost pump injects make-up flow into the
//! return line through a check valve, with a feeder relief valve protecting
//! the boost branch and a main relief valve across the loop. The four design
//! variables are the two pump displacements and the two prime-mover speeds.
//! The motor's volumetric efficiency is a health parameter: a "faulty"
//! motor leaks far more than a nominal one, and the corresponding slip
//! coefficients are found by calibration against target efficiencies.
//!
//! All node pressures are absolute (tank/atmosphere = 1e5 Pa); pressure
//! differences across machines are therefore offset-free.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hydraulics::{
    check_valve_flow, load_acceleration, motor_behavior, node_pressure_rate, pump_flow,
    relief_valve_flow, volumetric_efficiency, CheckValveParams, LoadParams, MotorParams,
    PipeParams, PrimeMoverParams, PumpParams, ReliefValveParams,
};
use crate::search::{ParamSpec, SearchSpace};
use crate::sim::{
    integrate, CircuitNetwork, IntegrationMethod, IntegratorConfig, SampleFlows, SimError,
    SimulationResult, StateLayout, StateVector, TerminalMetrics,
};
use crate::units::{
    cc_per_rev_to_m3_per_rad, m3_per_s_to_lpm, rad_per_s_to_rpm, rpm_to_rad_per_s,
};

/// Objective value charged to designs whose simulation diverges or whose
/// pump delivery is non-positive at the end of the run.
pub const DIVERGENCE_PENALTY: f64 = 1e9;

/// Tank / atmospheric reference pressure (Pa, absolute).
pub const ATMOSPHERIC_PA: f64 = 1e5;

/// Desired motor speed for both circuits (rpm).
pub const DESIRED_SPEED_RPM: f64 = 300.0;

/// Errors for design-point validation, kinematics, and calibration.
#[derive(Debug, Error)]
pub enum DomainError {
    #[error("{name} = {value} outside [{lower}, {upper}]")]
    OutOfBounds { name: String, value: f64, lower: f64, upper: f64 },
    #[error("point has {got} coordinates, expected {expected}")]
    WrongDimension { expected: usize, got: usize },
    #[error("motor displacement must be positive to compute a kinematic speed")]
    ZeroMotorDisplacement,
    #[error("calibration failed: {0}")]
    Calibration(String),
}

fn validated(space: &SearchSpace, values: &[f64]) -> Result<Vec<f64>, DomainError> {
    if values.len() != space.dims() {
        return Err(DomainError::WrongDimension { expected: space.dims(), got: values.len() });
    }
    for (v, p) in values.iter().zip(&space.params) {
        if *v < p.lower - 1e-9 || *v > p.upper + 1e-9 {
            return Err(DomainError::OutOfBounds {
                name: p.name.clone(),
                value: *v,
                lower: p.lower,
                upper: p.upper,
            });
        }
    }
    Ok(space.snap(values))
}

// ---------------------------------------------------------------------------
// Design points and spaces
// ---------------------------------------------------------------------------

/// Circuit A design variables (catalogue units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPointA {
    /// Pump displacement, cc/rev.
    pub pump_disp: f64,
    /// Motor displacement, cc/rev.
    pub motor_disp: f64,
    /// Supply/return pipe diameter, mm.
    pub pipe_diameter: f64,
}

impl DesignPointA {
    pub fn from_slice(values: &[f64]) -> Result<Self, DomainError> {
        let v = validated(&design_space_a(), values)?;
        Ok(Self { pump_disp: v[0], motor_disp: v[1], pipe_diameter: v[2] })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.pump_disp, self.motor_disp, self.pipe_diameter]
    }
}

/// Circuit B design variables (catalogue units). Order matches the report
/// tables: boost pump first, then its drive speed, then the main pump pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPointB {
    /// Boost (make-up) pump displacement, cc/rev.
    pub boost_pump_disp: f64,
    /// Boost pump drive speed, rpm.
    pub boost_pm_speed: f64,
    /// Main pump displacement, cc/rev.
    pub main_pump_disp: f64,
    /// Main pump drive speed, rpm.
    pub main_pm_speed: f64,
}

impl DesignPointB {
    pub fn from_slice(values: &[f64]) -> Result<Self, DomainError> {
        let v = validated(&design_space_b(), values)?;
        Ok(Self { boost_pump_disp: v[0], boost_pm_speed: v[1], main_pump_disp: v[2], main_pm_speed: v[3] })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.boost_pump_disp, self.boost_pm_speed, self.main_pump_disp, self.main_pm_speed]
    }
}

/// Gridded bounds for circuit A: pump 10–200 cc × motor 10–1000 cc × pipe
/// 7–60 mm (0.5 mm grid).
pub fn design_space_a() -> SearchSpace {
    SearchSpace::new(vec![
        ParamSpec::new("pump_disp_cc", 10.0, 200.0, 1.0),
        ParamSpec::new("motor_disp_cc", 10.0, 1000.0, 1.0),
        ParamSpec::new("pipe_diameter_mm", 7.0, 60.0, 0.5),
    ])
}

/// Gridded bounds for circuit B: displacements 10–750 cc, speeds
/// 100–2000 rpm, all on unit grids.
pub fn design_space_b() -> SearchSpace {
    SearchSpace::new(vec![
        ParamSpec::new("boost_pump_disp_cc", 10.0, 750.0, 1.0),
        ParamSpec::new("boost_pm_speed_rpm", 100.0, 2000.0, 1.0),
        ParamSpec::new("main_pump_disp_cc", 10.0, 750.0, 1.0),
        ParamSpec::new("main_pm_speed_rpm", 100.0, 2000.0, 1.0),
    ])
}

/// The benchmark circuit-B sizing, used as the calibration reference
/// operating point.
pub fn reference_point_b() -> DesignPointB {
    DesignPointB { boost_pump_disp: 43.0, boost_pm_speed: 678.0, main_pump_disp: 696.0, main_pm_speed: 276.0 }
}

// ---------------------------------------------------------------------------
// Configuration records
// ---------------------------------------------------------------------------

/// Scoring knobs for circuit A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfigA {
    /// Target motor speed, rpm.
    pub desired_speed_rpm: f64,
    /// Pump-size normalizer in the size penalty (the pump upper bound).
    pub pump_upper_bound: f64,
}

impl Default for ObjectiveConfigA {
    fn default() -> Self {
        Self { desired_speed_rpm: DESIRED_SPEED_RPM, pump_upper_bound: 200.0 }
    }
}

/// Motor-health selector for circuit B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultConfig {
    /// Use the degraded (leaky) motor when true, the healthy one otherwise.
    pub faulty: bool,
    /// Volumetric efficiency the selected motor state is calibrated to.
    pub target_volumetric_eff: f64,
}

impl Default for FaultConfig {
    fn default() -> Self {
        Self { faulty: true, target_volumetric_eff: 0.75 }
    }
}

/// Every physical constant that is not a design variable. Values ship as
/// working defaults; the two motor slip coefficients are reproducible with
/// [`calibrate_fault`] against the efficiency targets stored here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    /// Effective fluid bulk modulus, Pa.
    pub bulk_modulus_pa: f64,
    /// Vapor floor: lowest representable absolute pressure, Pa.
    pub vapor_floor_pa: f64,
    /// Tank / atmosphere, Pa absolute.
    pub atmospheric_pa: f64,
    /// Relief valve cracking pressure, bar (both circuits).
    pub relief_cracking_bar: f64,
    /// Relief valve override gradient, (L/min)/bar.
    pub relief_gradient_lpm_per_bar: f64,
    /// Check valve cracking pressure, bar.
    pub check_cracking_bar: f64,
    /// Check valve opening gradient, (L/min)/bar.
    pub check_gradient_lpm_per_bar: f64,

    /// Circuit A prime-mover speed, rpm.
    pub a_prime_mover_rpm: f64,
    /// Circuit A pump slip coefficient, (L/min)/bar.
    pub a_pump_slip_lpm_per_bar: f64,
    /// Circuit A motor slip coefficient, (L/min)/bar.
    pub a_motor_slip_lpm_per_bar: f64,
    /// Circuit A motor viscous friction, N·m/(rad/s).
    pub a_motor_viscous_friction: f64,
    /// Fixed manifold diameter on each circuit A line, mm.
    pub a_manifold_diameter_mm: f64,
    /// Length of each circuit A line (pipe and manifold), m.
    pub a_line_length_m: f64,
    /// Circuit A rotary load.
    pub a_load: LoadParams,

    /// Circuit B motor displacement, cc/rev.
    pub b_motor_displacement_cc: f64,
    /// Circuit B main pump slip coefficient, (L/min)/bar.
    pub b_main_pump_slip_lpm_per_bar: f64,
    /// Circuit B boost pump slip coefficient, (L/min)/bar.
    pub b_boost_pump_slip_lpm_per_bar: f64,
    /// Calibrated motor slip in the faulty state, (L/min)/bar.
    pub b_motor_slip_faulty_lpm_per_bar: f64,
    /// Calibrated motor slip in the nominal state, (L/min)/bar.
    pub b_motor_slip_nominal_lpm_per_bar: f64,
    /// Volumetric efficiency target of the nominal (healthy) motor.
    pub b_nominal_efficiency: f64,
    /// Circuit B main loop line diameter, mm.
    pub b_line_diameter_mm: f64,
    /// Circuit B main loop line length, m.
    pub b_line_length_m: f64,
    /// Circuit B feeder (boost branch) line diameter, mm.
    pub b_feeder_diameter_mm: f64,
    /// Circuit B feeder line length, m.
    pub b_feeder_length_m: f64,
    /// Circuit B rotary load (driven against a constant working torque).
    pub b_load: LoadParams,
    /// Circuit B simulation horizon, s. The faulty motor's leakage makes the
    /// loop approach steady state more slowly than circuit A's four-second
    /// window, so circuit B runs longer by default.
    pub b_sim_duration_s: f64,
}

impl Default for CalibrationRecord {
    fn default() -> Self {
        Self {
            bulk_modulus_pa: 1.4e9,
            vapor_floor_pa: 1.0e3,
            atmospheric_pa: ATMOSPHERIC_PA,
            relief_cracking_bar: 100.0,
            relief_gradient_lpm_per_bar: 10.0,
            check_cracking_bar: 0.3,
            check_gradient_lpm_per_bar: 10.0,
            a_prime_mover_rpm: 1500.0,
            a_pump_slip_lpm_per_bar: 0.05,
            a_motor_slip_lpm_per_bar: 0.05,
            a_motor_viscous_friction: 0.2,
            a_manifold_diameter_mm: 40.0,
            a_line_length_m: 1.0,
            a_load: LoadParams {
                inertia: 50.0,
                stiction: 0.0,
                coulomb: 0.0,
                viscous: 0.8,
                windage: 0.0,
                applied_torque: 0.0,
            },
            b_motor_displacement_cc: 473.0,
            b_main_pump_slip_lpm_per_bar: 0.05,
            b_boost_pump_slip_lpm_per_bar: 0.4,
            // Frozen output of `calibrate_fault` at the reference sizing
            // (43, 678, 696, 276) for the efficiency targets below.
            b_motor_slip_faulty_lpm_per_bar: 1.2,
            b_motor_slip_nominal_lpm_per_bar: 0.26,
            b_nominal_efficiency: 0.945,
            b_line_diameter_mm: 70.0,
            b_line_length_m: 1.0,
            b_feeder_diameter_mm: 40.0,
            b_feeder_length_m: 2.0,
            b_load: LoadParams {
                inertia: 50.0,
                stiction: 330.0,
                coulomb: 0.0,
                viscous: 0.5,
                windage: 0.0,
                applied_torque: 280.0,
            },
            b_sim_duration_s: 10.0,
        }
    }
}

/// Default integration settings for circuit A (four-second startup window).
pub fn sim_config_a() -> IntegratorConfig {
    IntegratorConfig { method: IntegrationMethod::Rk4, dt: 1e-3, duration: 4.0, sample_every: 10 }
}

/// Default integration settings for circuit B (longer horizon, see
/// [`CalibrationRecord::b_sim_duration_s`]).
pub fn sim_config_b(cal: &CalibrationRecord) -> IntegratorConfig {
    IntegratorConfig {
        method: IntegrationMethod::Rk4,
        dt: 1e-3,
        duration: cal.b_sim_duration_s,
        sample_every: 10,
    }
}

/// Copy of `cfg` that keeps only the initial and final samples — the right
/// setting for objective evaluations, which only need terminal metrics.
pub fn sparse_sampling(cfg: &IntegratorConfig) -> IntegratorConfig {
    let steps = (cfg.duration / cfg.dt).round().max(1.0) as usize;
    IntegratorConfig { sample_every: steps, ..*cfg }
}

// ---------------------------------------------------------------------------
// Circuit A
// ---------------------------------------------------------------------------

/// Simple closed-loop transmission (see module docs).
#[derive(Debug, Clone)]
pub struct CircuitA {
    pub pump: PumpParams,
    pub motor: MotorParams,
    pub relief: ReliefValveParams,
    pub load: LoadParams,
    pub prime_mover: PrimeMoverParams,
    supply_volume_m3: f64,
    return_volume_m3: f64,
    bulk_modulus_pa: f64,
    vapor_floor_pa: f64,
    atmospheric_pa: f64,
    layout: StateLayout,
}

const A_SUPPLY: usize = 0;
const A_RETURN: usize = 1;
const A_SPEED: usize = 2;

/// Builds circuit A for a sized design point. Validity of `dp` is enforced
/// where points are constructed ([`DesignPointA::from_slice`]).
pub fn build_circuit_a(dp: &DesignPointA, cal: &CalibrationRecord) -> CircuitA {
    let mut layout = StateLayout::default();
    layout.push("supply_pressure_pa", cal.vapor_floor_pa);
    layout.push("return_pressure_pa", cal.vapor_floor_pa);
    layout.push("load_speed_rad_s", f64::NEG_INFINITY);

    let pipe = PipeParams {
        diameter: dp.pipe_diameter,
        length: cal.a_line_length_m,
        bulk_modulus: cal.bulk_modulus_pa,
        vapor_floor: cal.vapor_floor_pa,
    };
    let manifold = PipeParams { diameter: cal.a_manifold_diameter_mm, ..pipe };
    let line_volume = pipe.volume_m3() + manifold.volume_m3();

    CircuitA {
        pump: PumpParams {
            displacement: dp.pump_disp,
            slip_coeff: cal.a_pump_slip_lpm_per_bar,
            visc_friction: 0.0,
            press_friction: 0.0,
        },
        motor: MotorParams {
            displacement: dp.motor_disp,
            slip_coeff: cal.a_motor_slip_lpm_per_bar,
            visc_friction: cal.a_motor_viscous_friction,
            press_friction: 0.0,
        },
        relief: ReliefValveParams {
            cracking_pressure: cal.relief_cracking_bar,
            gradient: cal.relief_gradient_lpm_per_bar,
        },
        load: cal.a_load,
        prime_mover: PrimeMoverParams { speed: cal.a_prime_mover_rpm },
        supply_volume_m3: line_volume,
        return_volume_m3: line_volume,
        bulk_modulus_pa: cal.bulk_modulus_pa,
        vapor_floor_pa: cal.vapor_floor_pa,
        atmospheric_pa: cal.atmospheric_pa,
        layout,
    }
}

impl CircuitA {
    /// Rest state: both lines at atmospheric pressure, load stopped.
    pub fn initial_state(&self) -> StateVector {
        StateVector::new(0.0, vec![self.atmospheric_pa, self.atmospheric_pa, 0.0])
    }

    fn flows(&self, state: &StateVector) -> (f64, f64, f64) {
        let p_s = state.get(A_SUPPLY);
        let p_r = state.get(A_RETURN);
        let w = state.get(A_SPEED);
        let w_pm = rpm_to_rad_per_s(self.prime_mover.speed);
        let delta_p = p_s - p_r;
        let q_pump_out = pump_flow(&self.pump, w_pm, delta_p);
        let (q_motor_in, _) = motor_behavior(&self.motor, w, delta_p);
        let q_relief = relief_valve_flow(&self.relief, p_s);
        (q_pump_out, q_motor_in, q_relief)
    }
}

impl CircuitNetwork for CircuitA {
    fn layout(&self) -> &StateLayout {
        &self.layout
    }

    fn derivative_into(&self, state: &StateVector, out: &mut [f64]) {
        let p_s = state.get(A_SUPPLY);
        let p_r = state.get(A_RETURN);
        let w = state.get(A_SPEED);
        let w_pm = rpm_to_rad_per_s(self.prime_mover.speed);
        let delta_p = p_s - p_r;

        // Slip leaks to the external drain: the pump draws its full swept
        // flow from the return line and delivers the slip-reduced flow; the
        // motor draws the slip-increased flow and discharges its swept flow.
        let q_pump_out = pump_flow(&self.pump, w_pm, delta_p);
        let q_pump_in = cc_per_rev_to_m3_per_rad(self.pump.displacement) * w_pm;
        let (q_motor_in, torque) = motor_behavior(&self.motor, w, delta_p);
        let q_motor_out = cc_per_rev_to_m3_per_rad(self.motor.displacement) * w;
        let q_relief = relief_valve_flow(&self.relief, p_s);

        out[A_SUPPLY] = node_pressure_rate(
            self.bulk_modulus_pa,
            self.vapor_floor_pa,
            self.supply_volume_m3,
            q_pump_out - q_motor_in - q_relief,
            p_s,
        );
        out[A_RETURN] = node_pressure_rate(
            self.bulk_modulus_pa,
            self.vapor_floor_pa,
            self.return_volume_m3,
            q_motor_out - q_pump_in,
            p_r,
        );
        out[A_SPEED] = load_acceleration(&self.load, torque, w);
    }

    fn flow_names(&self) -> Vec<String> {
        vec!["relief_flow_lpm".into()]
    }

    fn sample_flows(&self, state: &StateVector) -> SampleFlows {
        let (_, _, q_relief) = self.flows(state);
        SampleFlows { values: vec![m3_per_s_to_lpm(q_relief)] }
    }

    fn terminal_metrics(&self, state: &StateVector) -> TerminalMetrics {
        let (q_pump_out, _, q_relief) = self.flows(state);
        TerminalMetrics {
            motor_speed_rpm: rad_per_s_to_rpm(state.get(A_SPEED)),
            pump_flows_lpm: vec![m3_per_s_to_lpm(q_pump_out)],
            relief_flows_lpm: vec![m3_per_s_to_lpm(q_relief)],
        }
    }
}

// ---------------------------------------------------------------------------
// Circuit B
// ---------------------------------------------------------------------------

/// Boosted closed-loop transmission with a feeder branch (see module docs).
#[derive(Debug, Clone)]
pub struct CircuitB {
    pub main_pump: PumpParams,
    pub boost_pump: PumpParams,
    pub motor: MotorParams,
    pub relief_main: ReliefValveParams,
    pub relief_feeder: ReliefValveParams,
    pub check: CheckValveParams,
    pub load: LoadParams,
    pub main_pm: PrimeMoverParams,
    pub boost_pm: PrimeMoverParams,
    loop_volume_m3: f64,
    feeder_volume_m3: f64,
    bulk_modulus_pa: f64,
    vapor_floor_pa: f64,
    atmospheric_pa: f64,
    layout: StateLayout,
}

const B_SUPPLY: usize = 0;
const B_RETURN: usize = 1;
const B_FEEDER: usize = 2;
const B_SPEED: usize = 3;

/// Builds circuit B with the motor in the state selected by `fault`.
pub fn build_circuit_b(dp: &DesignPointB, fault: &FaultConfig, cal: &CalibrationRecord) -> CircuitB {
    let slip = if fault.faulty {
        cal.b_motor_slip_faulty_lpm_per_bar
    } else {
        cal.b_motor_slip_nominal_lpm_per_bar
    };
    build_circuit_b_with_slip(dp, slip, cal)
}

/// Builds circuit B with an explicit motor slip coefficient (used by the
/// calibration search).
pub fn build_circuit_b_with_slip(
    dp: &DesignPointB,
    motor_slip_lpm_per_bar: f64,
    cal: &CalibrationRecord,
) -> CircuitB {
    let mut layout = StateLayout::default();
    layout.push("supply_pressure_pa", cal.vapor_floor_pa);
    layout.push("return_pressure_pa", cal.vapor_floor_pa);
    layout.push("feeder_pressure_pa", cal.vapor_floor_pa);
    layout.push("load_speed_rad_s", f64::NEG_INFINITY);

    let line = PipeParams {
        diameter: cal.b_line_diameter_mm,
        length: cal.b_line_length_m,
        bulk_modulus: cal.bulk_modulus_pa,
        vapor_floor: cal.vapor_floor_pa,
    };
    let feeder = PipeParams {
        diameter: cal.b_feeder_diameter_mm,
        length: cal.b_feeder_length_m,
        ..line
    };

    CircuitB {
        main_pump: PumpParams {
            displacement: dp.main_pump_disp,
            slip_coeff: cal.b_main_pump_slip_lpm_per_bar,
            visc_friction: 0.0,
            press_friction: 0.0,
        },
        boost_pump: PumpParams {
            displacement: dp.boost_pump_disp,
            slip_coeff: cal.b_boost_pump_slip_lpm_per_bar,
            visc_friction: 0.0,
            press_friction: 0.0,
        },
        motor: MotorParams {
            displacement: cal.b_motor_displacement_cc,
            slip_coeff: motor_slip_lpm_per_bar,
            visc_friction: 0.0,
            press_friction: 0.0,
        },
        relief_main: ReliefValveParams {
            cracking_pressure: cal.relief_cracking_bar,
            gradient: cal.relief_gradient_lpm_per_bar,
        },
        relief_feeder: ReliefValveParams {
            cracking_pressure: cal.relief_cracking_bar,
            gradient: cal.relief_gradient_lpm_per_bar,
        },
        check: CheckValveParams {
            cracking_pressure: cal.check_cracking_bar,
            gradient: cal.check_gradient_lpm_per_bar,
        },
        load: cal.b_load,
        main_pm: PrimeMoverParams { speed: dp.main_pm_speed },
        boost_pm: PrimeMoverParams { speed: dp.boost_pm_speed },
        loop_volume_m3: line.volume_m3(),
        feeder_volume_m3: feeder.volume_m3(),
        bulk_modulus_pa: cal.bulk_modulus_pa,
        vapor_floor_pa: cal.vapor_floor_pa,
        atmospheric_pa: cal.atmospheric_pa,
        layout,
    }
}

impl CircuitB {
    /// Rest state: all nodes at atmospheric pressure, load stopped.
    pub fn initial_state(&self) -> StateVector {
        StateVector::new(0.0, vec![self.atmospheric_pa, self.atmospheric_pa, self.atmospheric_pa, 0.0])
    }

    fn flows(&self, state: &StateVector) -> (f64, f64, f64, f64) {
        let p_s = state.get(B_SUPPLY);
        let p_f = state.get(B_FEEDER);
        let delta_p = p_s - state.get(B_RETURN);
        let q_main_out = pump_flow(&self.main_pump, rpm_to_rad_per_s(self.main_pm.speed), delta_p);
        let q_boost_out =
            pump_flow(&self.boost_pump, rpm_to_rad_per_s(self.boost_pm.speed), p_f - self.atmospheric_pa);
        let rv_main = relief_valve_flow(&self.relief_main, p_s);
        let rv_feeder = relief_valve_flow(&self.relief_feeder, p_f);
        (q_main_out, q_boost_out, rv_main, rv_feeder)
    }
}

impl CircuitNetwork for CircuitB {
    fn layout(&self) -> &StateLayout {
        &self.layout
    }

    fn derivative_into(&self, state: &StateVector, out: &mut [f64]) {
        let p_s = state.get(B_SUPPLY);
        let p_r = state.get(B_RETURN);
        let p_f = state.get(B_FEEDER);
        let w = state.get(B_SPEED);
        let w_main = rpm_to_rad_per_s(self.main_pm.speed);
        let delta_p = p_s - p_r;

        let q_main_out = pump_flow(&self.main_pump, w_main, delta_p);
        let q_main_in = cc_per_rev_to_m3_per_rad(self.main_pump.displacement) * w_main;
        let q_boost_out =
            pump_flow(&self.boost_pump, rpm_to_rad_per_s(self.boost_pm.speed), p_f - self.atmospheric_pa);
        let (q_motor_in, torque) = motor_behavior(&self.motor, w, delta_p);
        let q_motor_out = cc_per_rev_to_m3_per_rad(self.motor.displacement) * w;
        // Main relief spills across the loop (supply to return); the feeder
        // relief protects the boost branch and spills to tank.
        let rv_main = relief_valve_flow(&self.relief_main, p_s);
        let rv_feeder = relief_valve_flow(&self.relief_feeder, p_f);
        let q_check = check_valve_flow(&self.check, p_f - p_r);

        out[B_SUPPLY] = node_pressure_rate(
            self.bulk_modulus_pa,
            self.vapor_floor_pa,
            self.loop_volume_m3,
            q_main_out - q_motor_in - rv_main,
            p_s,
        );
        out[B_RETURN] = node_pressure_rate(
            self.bulk_modulus_pa,
            self.vapor_floor_pa,
            self.loop_volume_m3,
            q_motor_out + q_check + rv_main - q_main_in,
            p_r,
        );
        out[B_FEEDER] = node_pressure_rate(
            self.bulk_modulus_pa,
            self.vapor_floor_pa,
            self.feeder_volume_m3,
            q_boost_out - q_check - rv_feeder,
            p_f,
        );
        out[B_SPEED] = load_acceleration(&self.load, torque, w);
    }

    fn flow_names(&self) -> Vec<String> {
        vec!["relief_flow_lpm".into(), "feeder_relief_flow_lpm".into()]
    }

    fn sample_flows(&self, state: &StateVector) -> SampleFlows {
        let (_, _, rv_main, rv_feeder) = self.flows(state);
        SampleFlows { values: vec![m3_per_s_to_lpm(rv_main), m3_per_s_to_lpm(rv_feeder)] }
    }

    fn terminal_metrics(&self, state: &StateVector) -> TerminalMetrics {
        let (q_main_out, q_boost_out, rv_main, rv_feeder) = self.flows(state);
        TerminalMetrics {
            motor_speed_rpm: rad_per_s_to_rpm(state.get(B_SPEED)),
            pump_flows_lpm: vec![m3_per_s_to_lpm(q_main_out), m3_per_s_to_lpm(q_boost_out)],
            relief_flows_lpm: vec![m3_per_s_to_lpm(rv_main), m3_per_s_to_lpm(rv_feeder)],
        }
    }
}

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

/// Circuit A score: squared terminal speed error, inflated by a pump-size
/// penalty and a relief-waste penalty. Non-positive pump delivery earns
/// [`DIVERGENCE_PENALTY`].
pub fn objective_a(m: &TerminalMetrics, dp: &DesignPointA, cfg: &ObjectiveConfigA) -> f64 {
    let pump_flow = m.pump_flows_lpm[0];
    if pump_flow <= 0.0 {
        return DIVERGENCE_PENALTY;
    }
    let err = cfg.desired_speed_rpm - m.motor_speed_rpm;
    err * err * (1.0 + dp.pump_disp / cfg.pump_upper_bound) * (1.0 + m.relief_flows_lpm[0] / pump_flow)
}

/// Circuit B score: squared terminal speed error, inflated by relief-waste
/// penalties on the main loop and the feeder branch. Non-positive delivery
/// from either pump earns [`DIVERGENCE_PENALTY`].
pub fn objective_b(m: &TerminalMetrics, desired_speed_rpm: f64) -> f64 {
    let main_flow = m.pump_flows_lpm[0];
    let boost_flow = m.pump_flows_lpm[1];
    if main_flow <= 0.0 || boost_flow <= 0.0 {
        return DIVERGENCE_PENALTY;
    }
    let err = desired_speed_rpm - m.motor_speed_rpm;
    err * err
        * (1.0 + m.relief_flows_lpm[0] / main_flow)
        * (1.0 + m.relief_flows_lpm[1] / boost_flow)
}

/// Speed (rpm) of a lossless pump/motor pair: the prime-mover speed scaled
/// by the displacement ratio.
pub fn lossless_speed(pm_speed_rpm: f64, pump_disp: f64, motor_disp: f64) -> Result<f64, DomainError> {
    if motor_disp <= 0.0 {
        return Err(DomainError::ZeroMotorDisplacement);
    }
    Ok(pm_speed_rpm * pump_disp / motor_disp)
}

/// Simulates circuit A at `dp` and scores it; divergence maps to the penalty.
pub fn score_a(
    dp: &DesignPointA,
    cal: &CalibrationRecord,
    obj: &ObjectiveConfigA,
    sim: &IntegratorConfig,
) -> f64 {
    let circuit = build_circuit_a(dp, cal);
    match integrate(&circuit, &circuit.initial_state(), sim) {
        Ok(result) => objective_a(&result.terminal, dp, obj),
        Err(SimError::Diverged { .. }) => DIVERGENCE_PENALTY,
        Err(SimError::InvalidConfig(msg)) => panic!("invalid simulation config: {msg}"),
    }
}

/// Simulates circuit B at `dp` and scores it; divergence maps to the penalty.
pub fn score_b(
    dp: &DesignPointB,
    fault: &FaultConfig,
    cal: &CalibrationRecord,
    sim: &IntegratorConfig,
) -> f64 {
    let circuit = build_circuit_b(dp, fault, cal);
    match integrate(&circuit, &circuit.initial_state(), sim) {
        Ok(result) => objective_b(&result.terminal, DESIRED_SPEED_RPM),
        Err(SimError::Diverged { .. }) => DIVERGENCE_PENALTY,
        Err(SimError::InvalidConfig(msg)) => panic!("invalid simulation config: {msg}"),
    }
}

/// Runs circuit A at `dp` and returns the full trajectory.
pub fn simulate_a(
    dp: &DesignPointA,
    cal: &CalibrationRecord,
    sim: &IntegratorConfig,
) -> Result<SimulationResult, SimError> {
    let circuit = build_circuit_a(dp, cal);
    integrate(&circuit, &circuit.initial_state(), sim)
}

/// Runs circuit B at `dp` and returns the full trajectory.
pub fn simulate_b(
    dp: &DesignPointB,
    fault: &FaultConfig,
    cal: &CalibrationRecord,
    sim: &IntegratorConfig,
) -> Result<SimulationResult, SimError> {
    let circuit = build_circuit_b(dp, fault, cal);
    integrate(&circuit, &circuit.initial_state(), sim)
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

/// Simulated volumetric efficiency of the circuit B motor at the end of a
/// run with the given slip coefficient.
fn simulated_efficiency(
    slip_lpm_per_bar: f64,
    point: &DesignPointB,
    cal: &CalibrationRecord,
) -> Result<f64, DomainError> {
    let circuit = build_circuit_b_with_slip(point, slip_lpm_per_bar, cal);
    let result = integrate(&circuit, &circuit.initial_state(), &sparse_sampling(&sim_config_b(cal)))
        .map_err(|e| DomainError::Calibration(format!("reference simulation failed: {e}")))?;
    let (final_state, _) = result.samples.last().expect("simulation produces samples");
    let delta_p = final_state.get(B_SUPPLY) - final_state.get(B_RETURN);
    Ok(volumetric_efficiency(&circuit.motor, final_state.get(B_SPEED), delta_p))
}

/// Finds, by bisection, the motor slip coefficient at which the simulated
/// volumetric efficiency at the reference operating point matches
/// `target_eff` within ±1%. Slip rises as efficiency falls, so the target
/// brackets between zero slip (efficiency 1) and a deliberately leaky upper
/// bound.
pub fn calibrate_fault(
    cal: &CalibrationRecord,
    target_eff: f64,
    point: &DesignPointB,
) -> Result<f64, DomainError> {
    const SLIP_MAX: f64 = 10.0; // (L/min)/bar; far leakier than any target here
    const REL_TOL: f64 = 0.01;

    if !(0.0..=1.0).contains(&target_eff) {
        return Err(DomainError::Calibration(format!(
            "target efficiency {target_eff} outside (0, 1]"
        )));
    }
    if target_eff >= 1.0 {
        return Ok(0.0); // zero slip is exactly lossless
    }

    let eff_at_max = simulated_efficiency(SLIP_MAX, point, cal)?;
    if eff_at_max > target_eff {
        return Err(DomainError::Calibration(format!(
            "cannot bracket target efficiency {target_eff}: even slip {SLIP_MAX} (L/min)/bar \
             only degrades efficiency to {eff_at_max:.3}"
        )));
    }

    let (mut lo, mut hi) = (0.0_f64, SLIP_MAX);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..60 {
        mid = 0.5 * (lo + hi);
        let eff = simulated_efficiency(mid, point, cal)?;
        if (eff - target_eff).abs() <= REL_TOL * target_eff * 0.1 {
            return Ok(mid);
        }
        if eff > target_eff {
            lo = mid; // not leaky enough yet
        } else {
            hi = mid;
        }
    }

    let eff = simulated_efficiency(mid, point, cal)?;
    if (eff - target_eff).abs() <= REL_TOL * target_eff {
        Ok(mid)
    } else {
        Err(DomainError::Calibration(format!(
            "bisection did not converge: efficiency {eff:.4} vs target {target_eff:.4}"
        )))
    }
}
