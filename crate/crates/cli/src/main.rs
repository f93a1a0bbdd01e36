use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bistatic_ipcrlb::error::Error;
use bistatic_ipcrlb::sim::{self, emit_csv, Scenario, Table};
use clap::{Args, Parser, Subcommand};

/// Bistatic radar tracking experiments: measurement uncertainty sweeps,
/// MSE bound comparisons and receiver trajectory control.
#[derive(Parser, Debug)]
#[command(name = "ipcrlb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measurement uncertainty and detection probability along geometry sweeps
    TmuSweep(Common),
    /// Single-step bound traces of the three bounds along geometry sweeps
    BoundsCompare(Common),
    /// Tracker error against the bound with a stationary receiver
    Track(Common),
    /// Closed-loop receiver control, one block of rows per policy
    ControlCompare(Common),
    /// Doppler sensitivity to bistatic range and its effect on velocity accuracy
    ValidateAssumption1(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (JSON); built-in defaults when omitted
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, created if missing
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Master seed, overrides sim.seed
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Monte Carlo sample count, overrides bounds.n_samples and control.n_samples
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    /// Run count, overrides sim.runs
    #[arg(long, value_name = "N")]
    runs: Option<usize>,
    /// Worker threads (default: all cores)
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(c: &Common) -> Result<Scenario, Failure> {
    let mut scn = match &c.config {
        Some(p) => Scenario::from_path(p)?,
        None => Scenario::default(),
    };
    if let Some(s) = c.seed {
        scn.sim.seed = s;
    }
    if let Some(n) = c.samples {
        scn.bounds.n_samples = n;
        scn.control.n_samples = n;
    }
    if let Some(n) = c.runs {
        scn.sim.runs = n;
    }
    scn.validate()?;
    Ok(scn)
}

fn write(table: &Table, dir: &Path, name: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    emit_csv(table, &path)?;
    eprintln!("wrote {} ({} rows)", path.display(), table.rows.len());
    Ok(())
}

fn run(cmd: Command) -> Result<(), Failure> {
    let (c, stage) = match &cmd {
        Command::TmuSweep(c) => (c, "tmu sweep"),
        Command::BoundsCompare(c) => (c, "bound comparison"),
        Command::Track(c) => (c, "tracking runs"),
        Command::ControlCompare(c) => (c, "closed-loop control"),
        Command::ValidateAssumption1(c) => (c, "assumption check"),
    };
    if c.threads == Some(0) {
        return Err(Failure::Config("--threads must be at least 1".into()));
    }
    let scn = load(c)?;
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    std::fs::create_dir_all(&c.out)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", c.out.display())))?;
    eprintln!("{stage}: seed {}", scn.sim.seed);
    match cmd {
        Command::TmuSweep(_) => write(&sim::tmu_sweep_table(&scn)?, &c.out, "tmu_sweep.csv"),
        Command::BoundsCompare(_) => write(&sim::bounds_table(&scn)?, &c.out, "bounds.csv"),
        Command::Track(_) => {
            let steps = sim::run_track_experiment(&scn)?;
            write(&sim::track_table(&steps), &c.out, "track.csv")
        }
        Command::ControlCompare(_) => {
            let res = sim::run_closed_loop(&scn)?;
            write(&sim::closed_loop_table(&res), &c.out, "closed_loop.csv")
        }
        Command::ValidateAssumption1(_) => write(&sim::assumption1_table(&scn)?, &c.out, "assumption1.csv"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
