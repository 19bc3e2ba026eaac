use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use uavfl::commands::{self, parse_scheme, SweepParam};
use uavfl::{load_scenario, CliError, CliResult};
use uavfl_core::solver::{Scheme, SolveSettings};

/// Latency minimization for UAV-enabled federated learning with sensing.
#[derive(Parser, Debug)]
#[command(name = "uavfl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario TOML file (default: the bundled three-UAV scenario)
    #[arg(long)]
    scenario: Option<PathBuf>,

    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Stop when the relative latency change per iteration drops below this
    #[arg(long, default_value_t = SolveSettings::default().bcd_tol)]
    bcd_tol: f64,

    /// Cap on outer iterations
    #[arg(long, default_value_t = SolveSettings::default().max_bcd_iters)]
    max_iters: usize,

    /// Omit the generation time and wall-clock columns so reruns are byte-identical
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize one scheme and write the per-iteration trace
    Run {
        #[command(flatten)]
        common: Common,

        /// joint, uav-only or bs-only
        #[arg(long, default_value = "joint", value_parser = parse_scheme)]
        scheme: Scheme,

        /// Final-point JSON (default: next to --out with extension .final.json)
        #[arg(long)]
        final_out: Option<PathBuf>,
    },
    /// Final latency over a range of one capacity parameter
    Sweep {
        #[command(flatten)]
        common: Common,

        /// f_uav_max, p_cm_max, f_bs_max or p_bs_max
        #[arg(long)]
        param: SweepParam,

        /// Comma-separated values, SI or with units ("1 GHz", "20 dBm")
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,

        /// Comma-separated schemes
        #[arg(long, value_delimiter = ',', default_value = "joint,uav-only,bs-only", value_parser = parse_scheme)]
        schemes: Vec<Scheme>,
    },
    /// Run all three schemes and report the joint scheme's savings
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Check the solver against brute-force grid search on a tiny scenario
    Validate {
        #[command(flatten)]
        common: Common,

        /// Grid points per variable
        #[arg(long, default_value_t = 17)]
        grid_points: usize,

        /// Exit with 1 when the solver is worse than the grid by more than this percentage
        #[arg(long, default_value_t = 5.0)]
        max_gap_pct: f64,
    },
}

impl Common {
    fn settings(&self) -> CliResult<SolveSettings> {
        let s = SolveSettings { bcd_tol: self.bcd_tol, max_bcd_iters: self.max_iters, ..Default::default() };
        s.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(s)
    }

    fn timestamp(&self) -> Option<u64> {
        (!self.no_timestamp).then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
    }

    fn writer(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn final_path(out: &Path) -> PathBuf {
    out.with_extension("final.json")
}

fn execute(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Run { common, scheme, final_out } => {
            let config = load_scenario(common.scenario.as_deref())?;
            let trace = commands::cmd_run(&config, scheme, &common.settings()?)?;
            let mut out = common.writer()?;
            commands::write_trace_csv(&mut out, &trace, common.timestamp())?;
            out.flush()?;
            if let Some(path) = final_out.or_else(|| common.out.as_deref().map(final_path)) {
                let point = commands::final_point(&config, &trace)?;
                serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &point)?;
            }
            if let uavfl_core::solver::BcdStatus::Failed(msg) = &trace.status {
                eprintln!("uavfl: stopped early: {msg}");
            }
            Ok(commands::run_exit_code(&trace))
        }
        Command::Sweep { common, param, values, schemes } => {
            let config = load_scenario(common.scenario.as_deref())?;
            let values: Vec<f64> =
                values.iter().map(|v| param.parse_value(v)).collect::<Result<_, _>>().map_err(CliError::Usage)?;
            let rows = commands::cmd_sweep(&config, param, &values, &schemes, &common.settings()?)?;
            let mut out = common.writer()?;
            commands::write_sweep_csv(&mut out, &rows, common.timestamp())?;
            out.flush()?;
            Ok(0)
        }
        Command::Compare { common } => {
            let config = load_scenario(common.scenario.as_deref())?;
            let rows = commands::cmd_compare(&config, &common.settings()?)?;
            let mut out = common.writer()?;
            commands::write_compare_csv(&mut out, &rows, common.timestamp())?;
            out.flush()?;
            Ok(0)
        }
        Command::Validate { common, grid_points, max_gap_pct } => {
            let config = load_scenario(common.scenario.as_deref())?;
            let report = commands::cmd_validate(&config, grid_points, &common.settings()?)?;
            let mut out = common.writer()?;
            commands::write_validate_csv(&mut out, &report)?;
            out.flush()?;
            Ok(if report.gap_pct <= max_gap_pct { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors share exit code 1 with other failures; 2 means the iteration cap.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("uavfl: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
