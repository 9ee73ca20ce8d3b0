//! Command-line front end for the transmission-design studies: calibrate the
//! dual-pump circuit's motor slip, run optimization batches, and export
//! simulation traces.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on calibration, I/O, or
//! simulation errors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hydro_core::{
    build_circuit_a, build_circuit_b, calibrate, export_timeseries, integrate, load_calibration,
    run_experiment, save_calibration, sim_config_a, sim_config_b, space_for, summarize,
    write_runs_csv, CalibrationRecord, CircuitId, CircuitNetwork, DesignPointA, DesignPointB,
    ExperimentSpec, FaultConfig, IntegratorConfig, Method,
};

#[derive(Parser)]
#[command(
    name = "hydro-opt",
    about = "Size hydrostatic transmissions by simulation-based global optimization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the dual-pump circuit's motor slip coefficients (faulty and
    /// healthy) and write them to a calibration file.
    Calibrate(CalibrateArgs),
    /// Run a batch of independently seeded optimizer runs and export the
    /// per-run results as CSV.
    Run(RunArgs),
    /// Simulate one design point and export the trajectory as CSV.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct CalibrateArgs {
    /// Volumetric efficiency the faulty motor must exhibit at the reference
    /// design.
    #[arg(long, default_value_t = 0.75)]
    target_eff: f64,
    /// Where to write the calibration JSON.
    #[arg(long, default_value = "calibration.json")]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum CircuitArg {
    A,
    B,
}

#[derive(Copy, Clone, ValueEnum)]
enum MethodArg {
    Tabu,
    Pga,
}

#[derive(Args)]
struct RunArgs {
    /// Which circuit to optimize.
    #[arg(long, value_enum)]
    circuit: CircuitArg,
    /// Which optimizer to use.
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Number of independently seeded runs.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Base seed; run i uses seed + i.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Evaluation budget override for the tabu search.
    #[arg(long)]
    max_evals: Option<usize>,
    /// Simulate the dual-pump motor without its leakage fault.
    #[arg(long)]
    healthy: bool,
    /// Calibration file (required for circuit B; optional for circuit A).
    #[arg(long, default_value = "calibration.json")]
    calibration: PathBuf,
    /// Where to write the per-run CSV.
    #[arg(long, default_value = "runs.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Which circuit to simulate.
    #[arg(long, value_enum)]
    circuit: CircuitArg,
    /// Design point, comma-separated: pump,motor,pipe for circuit A;
    /// boost-pump,boost-speed,main-pump,main-speed for circuit B.
    #[arg(long)]
    point: String,
    /// Simulate the dual-pump motor without its leakage fault.
    #[arg(long)]
    healthy: bool,
    /// Simulated duration in seconds (defaults to the circuit's horizon).
    #[arg(long)]
    duration: Option<f64>,
    /// Calibration file (required for circuit B; optional for circuit A).
    #[arg(long, default_value = "calibration.json")]
    calibration: PathBuf,
    /// Where to write the trajectory CSV.
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
}

/// Failures after argument parsing, split by exit code.
enum CliError {
    /// Semantically invalid arguments (exit 1).
    Usage(String),
    /// Calibration, simulation, or I/O failures (exit 2).
    Operational(String),
}

impl From<hydro_core::HarnessError> for CliError {
    fn from(e: hydro_core::HarnessError) -> Self {
        CliError::Operational(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Operational(e.to_string())
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version print to stdout and are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Run(args) => cmd_run(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Operational(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let fault = FaultConfig { faulty: true, target_volumetric_eff: args.target_eff };
    let cal = calibrate(&CalibrationRecord::default(), &fault)?;
    save_calibration(&cal, &args.out)?;
    println!(
        "calibrated motor slip: faulty {:.4} L/min/bar (eff {:.0}%), healthy {:.4} L/min/bar \
         (eff {:.1}%); written to {}",
        cal.b_motor_slip_faulty_lpm_per_bar,
        args.target_eff * 100.0,
        cal.b_motor_slip_nominal_lpm_per_bar,
        cal.b_nominal_efficiency * 100.0,
        args.out.display()
    );
    Ok(())
}

/// Circuit A ships with fixed constants, so a missing calibration file is
/// fine there; circuit B refuses to run without a calibrated motor slip.
fn calibration_for(circuit: CircuitArg, path: &PathBuf) -> Result<CalibrationRecord, CliError> {
    match circuit {
        CircuitArg::A => {
            if path.exists() {
                Ok(load_calibration(path)?)
            } else {
                Ok(CalibrationRecord::default())
            }
        }
        CircuitArg::B => Ok(load_calibration(path)?),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let cal = calibration_for(args.circuit, &args.calibration)?;
    let mut spec = ExperimentSpec::new(
        match args.circuit {
            CircuitArg::A => CircuitId::A,
            CircuitArg::B => CircuitId::B,
        },
        match args.method {
            MethodArg::Tabu => Method::Tabu,
            MethodArg::Pga => Method::Pga,
        },
    );
    spec.runs = args.runs;
    spec.base_seed = args.seed;
    spec.fault.faulty = !args.healthy;
    if let Some(evals) = args.max_evals {
        spec.tabu.max_evals = evals;
    }

    let records = run_experiment(&spec, &cal)?;
    let file = File::create(&args.out)?;
    write_runs_csv(&space_for(&spec), &records, BufWriter::new(file))?;
    let stats = summarize(&records)?;
    println!("{stats}");
    println!("per-run results written to {}", args.out.display());
    Ok(())
}

fn parse_point(s: &str, expected: usize) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let values =
        values.map_err(|e| CliError::Usage(format!("invalid --point value in {s:?}: {e}")))?;
    if values.len() != expected {
        return Err(CliError::Usage(format!(
            "--point needs {expected} comma-separated values, got {}",
            values.len()
        )));
    }
    Ok(values)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let cal = calibration_for(args.circuit, &args.calibration)?;
    let (circuit, init, mut sim): (Box<dyn CircuitNetwork>, _, IntegratorConfig) =
        match args.circuit {
            CircuitArg::A => {
                let values = parse_point(&args.point, 3)?;
                let dp = DesignPointA::from_slice(&values)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                let circuit = build_circuit_a(&dp, &cal);
                let init = circuit.initial_state();
                (Box::new(circuit) as Box<dyn CircuitNetwork>, init, sim_config_a())
            }
            CircuitArg::B => {
                let values = parse_point(&args.point, 4)?;
                let dp = DesignPointB::from_slice(&values)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                let fault = FaultConfig { faulty: !args.healthy, ..FaultConfig::default() };
                let circuit = build_circuit_b(&dp, &fault, &cal);
                let init = circuit.initial_state();
                (Box::new(circuit) as Box<dyn CircuitNetwork>, init, sim_config_b(&cal))
            }
        };
    if let Some(duration) = args.duration {
        if duration <= 0.0 {
            return Err(CliError::Usage("--duration must be positive".into()));
        }
        sim.duration = duration;
    }

    let result = integrate(circuit.as_ref(), &init, &sim)
        .map_err(|e| CliError::Operational(e.to_string()))?;
    let file = File::create(&args.out)?;
    let mut w = BufWriter::new(file);
    export_timeseries(circuit.as_ref(), &result, &mut w)?;
    w.flush()?;
    println!(
        "terminal speed {:.3} rpm; pump deliveries {:?} L/min; relief flows {:?} L/min; \
         trace written to {}",
        result.terminal.motor_speed_rpm,
        result.terminal.pump_flows_lpm,
        result.terminal.relief_flows_lpm,
        args.out.display()
    );
    Ok(())
}
