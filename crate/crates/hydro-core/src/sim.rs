//! Fixed-step integration of circuit networks.
//!
//! A circuit is anything implementing [`CircuitNetwork`]: it declares an
//! ordered layout of named state entries (pipe pressures, shaft speeds),
//! computes the state derivative, and derives algebraic flow readings from a
//! state. [`integrate`] marches that system with classic fourth-order
//! Runge-Kutta or forward Euler on a fixed grid, records decimated samples,
//! and reports terminal metrics. Integration is deterministic: the same
//! network, initial state, and config produce bit-identical results.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ordered, uniquely named state entries plus a lower clamp for each.
///
/// Pressures clamp at their vapor floor; speeds are unclamped (use
/// `f64::NEG_INFINITY`). The layout is fixed when the network is built.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateLayout {
    names: Vec<String>,
    floors: Vec<f64>,
}

impl StateLayout {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an entry and returns its index. Panics on a duplicate name:
    /// layouts are authored by circuit builders, so that is a programming
    /// error, not an input error.
    pub fn push(&mut self, name: &str, floor: f64) -> usize {
        assert!(
            !self.names.iter().any(|n| n == name),
            "duplicate state entry name: {name}"
        );
        self.names.push(name.to_string());
        self.floors.push(floor);
        self.names.len() - 1
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn floor(&self, index: usize) -> f64 {
        self.floors[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Clamps every entry of `values` to its floor.
    fn project(&self, values: &mut [f64]) {
        for (v, floor) in values.iter_mut().zip(&self.floors) {
            if *v < *floor {
                *v = *floor;
            }
        }
    }
}

/// A point in state space: simulation time plus one value per layout entry.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub t: f64,
    values: Vec<f64>,
}

impl StateVector {
    pub fn new(t: f64, values: Vec<f64>) -> Self {
        Self { t, values }
    }

    /// All-zero state matching a layout, at t = 0.
    pub fn zeros(layout: &StateLayout) -> Self {
        Self { t: 0.0, values: vec![0.0; layout.len()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn set(&mut self, index: usize, value: f64) {
        self.values[index] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Integration scheme for the fixed-step march.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegrationMethod {
    /// Classic fourth-order Runge-Kutta.
    Rk4,
    /// Forward Euler; first-order, available for step-size studies.
    Euler,
}

/// Fixed-grid integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: IntegrationMethod,
    /// Step size (s).
    pub dt: f64,
    /// Total simulated time (s).
    pub duration: f64,
    /// Keep every n-th step in the sample list (the final step is always
    /// kept).
    pub sample_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { method: IntegrationMethod::Rk4, dt: 1e-3, duration: 4.0, sample_every: 10 }
    }
}

impl IntegratorConfig {
    fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if self.sample_every == 0 {
            return Err(SimError::InvalidConfig("sample_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Algebraic flow readings derived from a sampled state, in the order given
/// by [`CircuitNetwork::flow_names`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFlows {
    pub values: Vec<f64>,
}

/// End-of-run readings the objective functions consume.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalMetrics {
    /// Load/motor shaft speed (rpm) at the end of the run.
    pub motor_speed_rpm: f64,
    /// Delivery of each pump (L/min) at the end of the run.
    pub pump_flows_lpm: Vec<f64>,
    /// Flow over each relief valve (L/min) at the end of the run.
    pub relief_flows_lpm: Vec<f64>,
}

/// Trajectory samples plus terminal metrics from one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// Decimated trajectory: each entry is the state snapshot (with its time)
    /// and the derived flows at that state. Strictly increasing in time and
    /// always ending at the final step.
    pub samples: Vec<(StateVector, SampleFlows)>,
    pub terminal: TerminalMetrics,
}

#[derive(Debug, Error)]
pub enum SimError {
    /// A state entry became non-finite; carries the simulation time at which
    /// the step failed.
    #[error("simulation diverged at t = {time:.6} s (non-finite state)")]
    Diverged { time: f64 },
    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),
}

/// A lumped-parameter circuit exposed as a first-order ODE system with
/// derived flow readings.
///
/// Implementations must be pure: `derivative_into` may not mutate shared
/// state, so independent integrations can run concurrently.
pub trait CircuitNetwork: Sync {
    /// State layout; fixed for the network's lifetime.
    fn layout(&self) -> &StateLayout;

    /// Writes d(state)/dt into `out` (same order as the layout).
    fn derivative_into(&self, state: &StateVector, out: &mut [f64]);

    /// Names for the derived flow readings, one per [`SampleFlows`] entry.
    fn flow_names(&self) -> Vec<String>;

    /// Derived flow readings at a state.
    fn sample_flows(&self, state: &StateVector) -> SampleFlows;

    /// End-of-run metrics at a state.
    fn terminal_metrics(&self, state: &StateVector) -> TerminalMetrics;
}

/// Convenience wrapper around [`CircuitNetwork::derivative_into`] that
/// allocates the rate vector; the returned vector carries the input's time.
pub fn derivative(network: &dyn CircuitNetwork, state: &StateVector) -> StateVector {
    let mut out = vec![0.0; state.len()];
    network.derivative_into(state, &mut out);
    StateVector::new(state.t, out)
}

/// Integrates the network from `init` over `[0, cfg.duration]`.
///
/// The state is projected onto the layout's floors after every step (the
/// component laws already clamp rates at the vapor floor; projection catches
/// overshoot within a step). Any non-finite state aborts with
/// [`SimError::Diverged`].
pub fn integrate(
    network: &dyn CircuitNetwork,
    init: &StateVector,
    cfg: &IntegratorConfig,
) -> Result<SimulationResult, SimError> {
    cfg.validate()?;
    let layout = network.layout();
    if init.len() != layout.len() {
        return Err(SimError::InvalidConfig(format!(
            "initial state has {} entries but the network layout has {}",
            init.len(),
            layout.len()
        )));
    }

    let n_steps = (cfg.duration / cfg.dt).round().max(1.0) as usize;
    let n = layout.len();

    let mut state = init.clone();
    state.t = 0.0;
    layout.project(&mut state.values);

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = StateVector::new(0.0, vec![0.0; n]);

    let mut samples = Vec::with_capacity(n_steps / cfg.sample_every + 2);
    samples.push((state.clone(), network.sample_flows(&state)));
    let mut last_sampled = 0usize;

    for step in 1..=n_steps {
        match cfg.method {
            IntegrationMethod::Euler => {
                network.derivative_into(&state, &mut k1);
                for i in 0..n {
                    state.values[i] += cfg.dt * k1[i];
                }
            }
            IntegrationMethod::Rk4 => {
                let half = 0.5 * cfg.dt;
                network.derivative_into(&state, &mut k1);
                stage.t = state.t + half;
                for i in 0..n {
                    stage.values[i] = state.values[i] + half * k1[i];
                }
                network.derivative_into(&stage, &mut k2);
                for i in 0..n {
                    stage.values[i] = state.values[i] + half * k2[i];
                }
                network.derivative_into(&stage, &mut k3);
                stage.t = state.t + cfg.dt;
                for i in 0..n {
                    stage.values[i] = state.values[i] + cfg.dt * k3[i];
                }
                network.derivative_into(&stage, &mut k4);
                for i in 0..n {
                    state.values[i] +=
                        cfg.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        state.t = step as f64 * cfg.dt;
        layout.project(&mut state.values);

        if state.values.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Diverged { time: state.t });
        }

        if step % cfg.sample_every == 0 {
            samples.push((state.clone(), network.sample_flows(&state)));
            last_sampled = step;
        }
    }

    if last_sampled != n_steps {
        samples.push((state.clone(), network.sample_flows(&state)));
    }

    let terminal = network.terminal_metrics(&state);
    Ok(SimulationResult { samples, terminal })
}
