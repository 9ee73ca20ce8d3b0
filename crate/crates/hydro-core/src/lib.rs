//! Simulation and optimization toolkit for hydrostatic transmission sizing.
//!
//! The crate models two lumped-parameter transmission circuits — a simple
//! pump/motor loop and a boosted closed loop with a feeder branch — and
//! searches their component-size spaces with two interchangeable global
//! optimizers: a tabu-restricted hill climber and an island-model genetic
//! algorithm. A batch harness runs repeated seeded experiments and exports
//! the per-run tables and time series used for method comparison.
//!
//! Module map:
//!
//! * [`units`] — conversions between catalogue units and SI
//! * [`hydraulics`] — component models (pumps, motors, valves, pipes, loads)
//! * [`sim`] — fixed-step integration of circuit networks
//! * [`search`] — gridded design spaces and solution records
//! * [`circuits`] — the two study circuits, their objectives, calibration
//! * [`tabu`] — tabu-restricted pattern search and a greedy polish variant
//! * [`pga`] — island-model genetic algorithm with a greedy polish stage
//! * [`harness`] — seeded batch experiments, statistics, CSV/JSON export

pub mod circuits;
pub mod harness;
pub mod hydraulics;
pub mod pga;
pub mod search;
pub mod sim;
pub mod tabu;
pub mod units;

pub use circuits::{
    build_circuit_a, build_circuit_b, calibrate_fault, design_space_a, design_space_b,
    lossless_speed, objective_a, objective_b, reference_point_b, score_a, score_b, sim_config_a,
    sim_config_b, simulate_a, simulate_b, sparse_sampling, CalibrationRecord, CircuitA, CircuitB,
    DesignPointA, DesignPointB, DomainError, FaultConfig, ObjectiveConfigA, ATMOSPHERIC_PA,
    DESIRED_SPEED_RPM, DIVERGENCE_PENALTY,
};
pub use harness::{
    calibrate, export_timeseries, load_calibration, run_experiment, save_calibration, space_for,
    summarize, write_runs_csv, CircuitId, ExperimentSpec, HarnessError, Method, RunRecord,
    StatsTable,
};
pub use hydraulics::{
    check_valve_flow, load_acceleration, motor_behavior, node_pressure_rate, pipe_pressure_rate,
    pump_flow, relief_valve_flow, slip_for_target_efficiency, volumetric_efficiency,
    CheckValveParams, LoadParams, MotorParams, PipeParams, PrimeMoverParams, PumpParams,
    ReliefValveParams,
};
pub use pga::{decode, migrate, pga_run, Individual, PgaConfig, PgaOutcome};
pub use search::{ParamSpec, SearchOutcome, SearchSpace, SolutionRecord};
pub use tabu::{hooke_jeeves, tabu_search, HookeJeevesConfig, TabuConfig, TabuState};
pub use sim::{
    derivative, integrate, CircuitNetwork, IntegrationMethod, IntegratorConfig, SampleFlows,
    SimError, SimulationResult, StateLayout, StateVector, TerminalMetrics,
};
