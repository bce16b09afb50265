//! `sim <scenario> [--config FILE] [--set key=value]... --out DIR`
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure, 1 I/O.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fluor_core::scenarios::{run_scenario, DriveAxis, Scenario, ScenarioConfig};
use fluor_core::Error;

#[derive(Parser, Debug)]
#[command(name = "sim", version, about = "Resonance-fluorescence scenarios")]
struct Args {
    /// spectrum, sweep, g1, dynamics, relax, pumped-spectrum, linewidth-sweep or fit
    scenario: String,
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, applied after the file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Drive values are cavity-port amplitudes, moved onto the atom in the displaced frame
    #[arg(long)]
    port_drive: bool,
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Config(_) | Error::Format { .. } => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_NUMERIC,
    }
}

fn configure(args: &Args) -> Result<ScenarioConfig, Error> {
    let scenario: Scenario = args.scenario.parse()?;
    let mut cfg = ScenarioConfig::new(scenario);
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for kv in &args.set {
        cfg.set_assignment(kv)?;
    }
    if args.port_drive {
        cfg.drive_axis = DriveAxis::Port;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("SIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("SIM_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))
}

fn run(args: &Args) -> Result<Vec<String>, Error> {
    threads()?;
    let cfg = configure(args).map_err(Error::at("config"))?;
    let out = run_scenario(&cfg)?;
    out.write(&args.out).map_err(Error::at("output"))?;
    let mut names: Vec<String> = out.files.iter().map(|(n, _)| n.clone()).collect();
    names.push("manifest.txt".into());
    Ok(names)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", args.out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
