//! Command-line front end. Exit codes: 0 success, 1 bad input, 2 internal.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gateway::{EngineConfig, ServeConfig, DEFAULT_RENDER_DECIMATION};
use crate::inverse::MotionDirection;
use crate::params::{HitchConfiguration, VehicleTrailerParams};
use crate::scenario::load_scenario;
use crate::session::replay_log;
use crate::tracking::{fmt9, ramped_sinusoid, run_tracking_experiment, TimeSeries, TrackingResult};
use crate::trajectory::{simulate_profile, write_trajectory_csv, InputProfile};

#[derive(Debug, Parser)]
#[command(name = "trailer-advisory", version, about = "Reverse-parking advisory simulator for a car and trailer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a scenario under a t,v_R,delta_f input profile and write the trajectory CSV.
    Simulate(SimulateArgs),
    /// Desired-versus-actual virtual steer for both hitch positions and both directions.
    Track(TrackArgs),
    /// Serve a scenario to WebSocket clients.
    Serve(ServeArgs),
    /// Re-run a session log and write its trajectory CSV.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub profile: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Integration step; defaults to the scenario's.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Seconds to simulate; defaults to the last profile time.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Profile steer angles are in degrees.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// CSV with columns t,delta_T; a ramped sinusoid when omitted.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.001)]
    pub dt: f64,
    #[arg(long, default_value_t = 40.0)]
    pub duration: f64,
    /// Hitch offset magnitude; runs use +lh and -lh.
    #[arg(long, default_value_t = 1.0)]
    pub lh: f64,
    #[arg(long, default_value_t = 2.5)]
    pub lt: f64,
    #[arg(long, default_value_t = 3.0)]
    pub wheelbase: f64,
    /// Vehicle speed magnitude; runs use +speed and -speed.
    #[arg(long, default_value_t = 1.0)]
    pub speed: f64,
    /// Extra hitch offset magnitudes for a mismatch sweep, written to sweep.csv.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<f64>,
    /// Profile angles are in degrees.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    /// Wall seconds per simulated second; 0 runs as fast as possible.
    #[arg(long, default_value_t = 1.0)]
    pub pacing: f64,
    /// Simulated seconds between state ticks.
    #[arg(long, default_value_t = DEFAULT_RENDER_DECIMATION)]
    pub decimation: f64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses the process arguments, runs, and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonFiniteState { .. } | Error::KinematicSingularity { .. } => 2,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Track(a) => track(a),
        Command::Serve(a) => serve(a),
        Command::Replay(a) => replay(a),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p != Path::new("-") => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?))
        }
        _ => Box::new(std::io::stdout().lock()),
    })
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let scenario = load_scenario(&a.scenario)?;
    let profile = InputProfile::load(&a.profile, a.degrees)?;
    let dt = a.dt.unwrap_or(scenario.dt);
    let duration = a.duration.unwrap_or_else(|| profile.duration());
    let rows = simulate_profile(
        &scenario.params,
        &scenario.initial_state,
        &profile,
        dt,
        duration,
        scenario.speed_limit,
    )?;
    write_trajectory_csv(&rows, output(a.out.as_deref())?)
}

#[derive(Deserialize)]
struct DesiredRow {
    t: f64,
    #[serde(rename = "delta_T")]
    delta_t: f64,
}

fn load_desired<R: Read>(input: R, degrees: bool) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let (mut t, mut v) = (Vec::new(), Vec::new());
    for row in rdr.deserialize::<DesiredRow>() {
        let row = row?;
        t.push(row.t);
        v.push(if degrees { row.delta_t.to_radians() } else { row.delta_t });
    }
    TimeSeries::new(t, v)
}

fn config_name(c: Option<HitchConfiguration>) -> &'static str {
    match c {
        Some(HitchConfiguration::BehindRearAxle) => "behind",
        Some(HitchConfiguration::AheadOfRearAxle) => "ahead",
        None => "on_axle",
    }
}

fn direction_name(d: MotionDirection) -> &'static str {
    match d {
        MotionDirection::Forward => "forward",
        MotionDirection::Reverse => "reverse",
    }
}

fn track(a: TrackArgs) -> Result<()> {
    let desired = match &a.profile {
        Some(p) => load_desired(File::open(p).map_err(|e| Error::io(p, e))?, a.degrees)?,
        None => TimeSeries::sampled(a.dt, a.duration, ramped_sinusoid(0.2, 0.3, 4.0)),
    };
    let base = VehicleTrailerParams {
        wheelbase: a.wheelbase,
        trailer_length: a.lt,
        ..VehicleTrailerParams::default()
    };
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;

    let run = |lh: f64, v: f64| -> Result<TrackingResult> {
        run_tracking_experiment(
            &base.with_hitch_offset(lh),
            &desired,
            &TimeSeries::constant(v),
            a.dt,
            a.duration,
        )
    };

    let summary_path = a.out.join("summary.csv");
    let mut summary = csv::Writer::from_writer(
        File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?,
    );
    summary.write_record([
        "configuration",
        "direction",
        "L_H",
        "max_mismatch",
        "rms_mismatch",
        "correlation",
        "saturated_steps",
    ])?;
    for lh in [a.lh.abs(), -a.lh.abs()] {
        for v in [-a.speed.abs(), a.speed.abs()] {
            let r = run(lh, v)?;
            let dir = MotionDirection::from_speed(v);
            let name = format!("{}_{}.csv", config_name(r.configuration), direction_name(dir));
            let path = a.out.join(name);
            r.write_csv(BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?))?;
            summary.write_record([
                config_name(r.configuration).to_string(),
                direction_name(dir).to_string(),
                fmt9(lh),
                fmt9(r.max_mismatch),
                fmt9(r.rms_mismatch),
                fmt9(r.correlation()),
                r.saturated_steps.to_string(),
            ])?;
        }
    }
    summary.flush().map_err(|e| Error::io(&summary_path, e))?;

    if !a.sweep.is_empty() {
        let sweep_path = a.out.join("sweep.csv");
        let mut w = csv::Writer::from_writer(
            File::create(&sweep_path).map_err(|e| Error::io(&sweep_path, e))?,
        );
        w.write_record(["L_H", "direction", "max_mismatch", "rms_mismatch"])?;
        for &lh in &a.sweep {
            for v in [-a.speed.abs(), a.speed.abs()] {
                let r = run(lh, v)?;
                w.write_record([
                    fmt9(lh),
                    direction_name(MotionDirection::from_speed(v)).to_string(),
                    fmt9(r.max_mismatch),
                    fmt9(r.rms_mismatch),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(&sweep_path, e))?;
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let scenario = load_scenario(&a.scenario)?;
    let config = ServeConfig {
        engine: EngineConfig {
            render_decimation: a.decimation,
        },
        pacing: a.pacing,
        ..ServeConfig::default()
    };
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("<tokio runtime>", e))?;
    rt.block_on(crate::gateway::serve(scenario, &a.bind, config))
}

fn replay(a: ReplayArgs) -> Result<()> {
    let replay = replay_log(&a.log)?;
    let s = replay.final_state;
    eprintln!(
        "replayed {} states; final t = {} x_R = {} y_R = {} psi_1 = {} psi_2 = {}",
        replay.states.len(),
        s.t,
        s.x,
        s.y,
        s.psi1,
        s.psi2
    );
    write_trajectory_csv(&replay.log.trajectory(), output(a.out.as_deref())?)
}
