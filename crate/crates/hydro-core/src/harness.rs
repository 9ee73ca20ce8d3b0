//! Batch experiment harness: repeated seeded optimizer runs on a chosen
//! circuit, per-run tables, summary statistics, time-series export, and
//! calibration file handling.
//!
//! Run `i` of a batch uses seed `base_seed + i`, so any single run can be
//! reproduced in isolation and a batch is independent of thread scheduling:
//! runs execute in parallel but their results are keyed by index. Exports
//! contain no wall-clock fields, so repeated batches are byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{
    calibrate_fault, design_space_a, design_space_b, reference_point_b, score_a, score_b,
    sim_config_a, sim_config_b, sparse_sampling, CalibrationRecord, DesignPointA, DesignPointB,
    DomainError, FaultConfig, ObjectiveConfigA,
};
use crate::pga::{pga_run, PgaConfig};
use crate::search::SearchSpace;
use crate::sim::{CircuitNetwork, IntegratorConfig, SimulationResult};
use crate::tabu::{tabu_search, TabuConfig};
use crate::units::{pa_to_bar, rad_per_s_to_rpm};

/// Which circuit a batch optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitId {
    A,
    B,
}

/// Which optimizer a batch uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tabu,
    Pga,
}

/// A full batch description. `sim` overrides the circuit's default
/// integration settings when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub circuit: CircuitId,
    pub method: Method,
    pub runs: usize,
    pub base_seed: u64,
    pub fault: FaultConfig,
    pub tabu: TabuConfig,
    pub pga: PgaConfig,
    pub sim: Option<IntegratorConfig>,
}

impl ExperimentSpec {
    pub fn new(circuit: CircuitId, method: Method) -> Self {
        Self {
            circuit,
            method,
            runs: 10,
            base_seed: 1,
            fault: FaultConfig::default(),
            tabu: TabuConfig::default(),
            pga: PgaConfig::default(),
            sim: None,
        }
    }
}

/// One optimizer run's result. `evals` counts every objective evaluation the
/// run spent (not just up to discovery). `wall_ms` is informational and is
/// never exported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: usize,
    pub seed: u64,
    pub point: Vec<f64>,
    pub obfn: f64,
    pub evals: usize,
    #[serde(skip)]
    pub wall_ms: f64,
}

/// Batch summary: mean and sample standard deviation of objective values and
/// evaluation counts, plus the best run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsTable {
    pub runs: usize,
    pub mean_obfn: f64,
    /// Absent for single-run batches.
    pub sd_obfn: Option<f64>,
    pub mean_evals: f64,
    /// Absent for single-run batches.
    pub sd_evals: Option<f64>,
    pub best: RunRecord,
}

impl std::fmt::Display for StatsTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fmt_sd = |sd: &Option<f64>| match sd {
            Some(v) => format!("{v:.4}"),
            None => "-".to_string(),
        };
        writeln!(f, "runs: {}", self.runs)?;
        writeln!(f, "obfn:  mean {:.6}  sd {}", self.mean_obfn, fmt_sd(&self.sd_obfn))?;
        writeln!(f, "evals: mean {:.1}  sd {}", self.mean_evals, fmt_sd(&self.sd_evals))?;
        write!(
            f,
            "best:  run {} (seed {}) obfn {:.6} at {:?} after {} evals",
            self.best.run_index, self.best.seed, self.best.obfn, self.best.point, self.best.evals
        )
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("batch contained no runs")]
    NoRuns,
    #[error(
        "calibration file {path} not found; run `hydro-opt calibrate` to create it \
         (circuit B needs calibrated motor-slip coefficients)"
    )]
    MissingCalibration { path: String },
    #[error("calibration: {0}")]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("calibration file is not valid: {0}")]
    Json(#[from] serde_json::Error),
}

/// The design space a spec searches over.
pub fn space_for(spec: &ExperimentSpec) -> SearchSpace {
    match spec.circuit {
        CircuitId::A => design_space_a(),
        CircuitId::B => design_space_b(),
    }
}

/// Integration settings used for objective evaluations: the spec's override
/// or the circuit default, thinned to initial+final samples.
fn eval_sim_config(spec: &ExperimentSpec, cal: &CalibrationRecord) -> IntegratorConfig {
    let base = spec.sim.unwrap_or(match spec.circuit {
        CircuitId::A => sim_config_a(),
        CircuitId::B => sim_config_b(cal),
    });
    sparse_sampling(&base)
}

/// Runs a full batch: `spec.runs` independent optimizer runs, run `i` seeded
/// with `base_seed + i`, executed in parallel and returned in run order.
pub fn run_experiment(
    spec: &ExperimentSpec,
    cal: &CalibrationRecord,
) -> Result<Vec<RunRecord>, HarnessError> {
    if spec.runs == 0 {
        return Err(HarnessError::NoRuns);
    }
    let space = space_for(spec);
    let sim = eval_sim_config(spec, cal);
    let obj_a = ObjectiveConfigA::default();

    let obfn = |x: &[f64]| -> f64 {
        match spec.circuit {
            CircuitId::A => {
                let dp = DesignPointA::from_slice(x).expect("optimizer proposes in-bounds points");
                score_a(&dp, cal, &obj_a, &sim)
            }
            CircuitId::B => {
                let dp = DesignPointB::from_slice(x).expect("optimizer proposes in-bounds points");
                score_b(&dp, &spec.fault, cal, &sim)
            }
        }
    };

    let records: Vec<RunRecord> = (0..spec.runs)
        .into_par_iter()
        .map(|i| {
            let seed = spec.base_seed + i as u64;
            let start = Instant::now();
            let (best, total_evals) = match spec.method {
                Method::Tabu => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let out = tabu_search(&space, &obfn, &spec.tabu, &mut rng);
                    (out.best, out.total_evals)
                }
                Method::Pga => {
                    let out = pga_run(&space, &obfn, &spec.pga, seed);
                    let total = out.total_evals();
                    (out.best, total)
                }
            };
            RunRecord {
                run_index: i,
                seed,
                point: best.point,
                obfn: best.obfn,
                evals: total_evals,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect();

    Ok(records)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n−1 divisor); `None` below two samples.
fn sample_sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

/// Summarizes a batch; errors on an empty one.
pub fn summarize(records: &[RunRecord]) -> Result<StatsTable, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::NoRuns);
    }
    let obfns: Vec<f64> = records.iter().map(|r| r.obfn).collect();
    let evals: Vec<f64> = records.iter().map(|r| r.evals as f64).collect();
    let best = records
        .iter()
        .min_by(|a, b| a.obfn.partial_cmp(&b.obfn).unwrap().then(a.run_index.cmp(&b.run_index)))
        .expect("non-empty")
        .clone();
    Ok(StatsTable {
        runs: records.len(),
        mean_obfn: mean(&obfns),
        sd_obfn: sample_sd(&obfns),
        mean_evals: mean(&evals),
        sd_evals: sample_sd(&evals),
        best,
    })
}

/// Writes the per-run table as CSV: run index, seed, one column per design
/// variable, objective, evaluation count. No timing columns, so identical
/// batches serialize identically.
pub fn write_runs_csv<W: Write>(
    space: &SearchSpace,
    records: &[RunRecord],
    mut w: W,
) -> std::io::Result<()> {
    write!(w, "run,seed")?;
    for p in &space.params {
        write!(w, ",{}", p.name)?;
    }
    writeln!(w, ",obfn,evals")?;
    for r in records {
        write!(w, "{},{}", r.run_index, r.seed)?;
        for v in &r.point {
            write!(w, ",{v}")?;
        }
        writeln!(w, ",{:.6e},{}", r.obfn, r.evals)?;
    }
    Ok(())
}

/// Writes a simulation trace as CSV: time, motor speed, supply pressure, and
/// one column per valve flow, six significant digits each.
pub fn export_timeseries<W: Write>(
    network: &dyn CircuitNetwork,
    result: &SimulationResult,
    mut w: W,
) -> std::io::Result<()> {
    let layout = network.layout();
    let speed_idx = layout.index_of("load_speed_rad_s").expect("circuits expose a load speed");
    let supply_idx = layout.index_of("supply_pressure_pa").expect("circuits expose a supply node");

    write!(w, "t_s,motor_speed_rpm,supply_pressure_bar")?;
    for name in network.flow_names() {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    for (state, flows) in &result.samples {
        write!(
            w,
            "{:.5e},{:.5e},{:.5e}",
            state.t,
            rad_per_s_to_rpm(state.get(speed_idx)),
            pa_to_bar(state.get(supply_idx))
        )?;
        for v in &flows.values {
            write!(w, ",{v:.5e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Produces a calibration record whose circuit-B motor slips are re-solved
/// for `fault.target_volumetric_eff` (faulty) and the record's nominal
/// efficiency, both at the benchmark reference sizing.
pub fn calibrate(
    template: &CalibrationRecord,
    fault: &FaultConfig,
) -> Result<CalibrationRecord, HarnessError> {
    let point = reference_point_b();
    let mut cal = template.clone();
    cal.b_motor_slip_faulty_lpm_per_bar =
        calibrate_fault(template, fault.target_volumetric_eff, &point)?;
    cal.b_motor_slip_nominal_lpm_per_bar =
        calibrate_fault(template, template.b_nominal_efficiency, &point)?;
    Ok(cal)
}

/// Saves a calibration record as pretty JSON.
pub fn save_calibration(cal: &CalibrationRecord, path: &Path) -> Result<(), HarnessError> {
    let json = serde_json::to_string_pretty(cal)?;
    fs::write(path, json + "\n")?;
    Ok(())
}

/// Loads a calibration record, with an actionable error when the file is
/// missing.
pub fn load_calibration(path: &Path) -> Result<CalibrationRecord, HarnessError> {
    if !path.exists() {
        return Err(HarnessError::MissingCalibration { path: path.display().to_string() });
    }
    let json = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&json)?)
}
