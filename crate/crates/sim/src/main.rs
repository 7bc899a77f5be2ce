use std::path::PathBuf;
use std::process::ExitCode;

use adtn_core::netsim::OracleVerdict;
use adtn_sim::commands::{oracle_table, AttackSpec, Axis};
use adtn_sim::{cmd_attack, cmd_oracle, cmd_run, cmd_sweep, load, SimError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adtn-sim", version, about = "Simulate group-mix messaging in delay-tolerant networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML or JSON, or a summary.json from an earlier run).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Replaces the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Dotted override, e.g. `node.tx_period=5`. Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    sets: Vec<String>,
}

impl ScenarioArgs {
    fn load(&self, trace_frames: bool) -> Result<adtn_sim::ScenarioConfig, SimError> {
        let mut sets = self.sets.clone();
        if let Some(seed) = self.seed {
            sets.push(format!("seed={seed}"));
        }
        if trace_frames {
            sets.push("output.trace_frames=true".into());
        }
        Ok(load(self.scenario.as_deref(), &sets)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its reports.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Include frame bytes in the trace files.
        #[arg(long)]
        trace_frames: bool,
    },
    /// Run a parameter grid; one row per point.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// `parameter=v1,v2,...`. Repeatable; points are the cartesian product.
        #[arg(long = "grid", value_name = "PARAM=VALUES")]
        grid: Vec<String>,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Replay attacks over an earlier run's trace files.
    Attack {
        /// Output directory of the run.
        #[arg(long)]
        trace: PathBuf,
        /// Compromised group names, comma separated, or `all`.
        #[arg(long, value_delimiter = ',')]
        keys: Vec<String>,
        /// Listening disk `x,y,radius`; global when absent.
        #[arg(long, value_delimiter = ',', value_name = "X,Y,R")]
        disk: Option<Vec<f64>>,
        /// Label for the report. Without --keys, --disk or --name, the run's
        /// own adversaries are replayed.
        #[arg(long)]
        name: Option<String>,
        /// Where to write reports; defaults to the trace directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a single-message run with the contact oracle.
    Oracle {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

fn run(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::Run { scenario, out, trace_frames } => {
            let config = scenario.load(trace_frames)?;
            let summary = cmd_run(&config, &out)?;
            println!("run {} written to {}", summary.run_id, out.display());
        }
        Command::Sweep { scenario, grid, out } => {
            let config = scenario.load(false)?;
            let axes = grid.iter().map(|g| Axis::parse(g)).collect::<Result<Vec<_>, _>>()?;
            let rows = cmd_sweep(&config, &axes, &out)?;
            println!("{} grid points written to {}", rows.len(), out.display());
        }
        Command::Attack { trace, keys, disk, name, out } => {
            let given = !keys.is_empty() || disk.is_some() || name.is_some();
            let specs: Vec<AttackSpec> = if given {
                let disk = match disk.as_deref() {
                    None => None,
                    Some(&[x, y, r]) => Some([x, y, r]),
                    Some(_) => return Err(SimError::Attack("--disk takes exactly three numbers: x,y,radius".into())),
                };
                vec![AttackSpec { name, keys, disk }]
            } else {
                Vec::new()
            };
            let out = out.unwrap_or_else(|| trace.clone());
            for r in cmd_attack(&trace, &specs, &out)? {
                let anon = r.mean_sender_anonymity.map_or_else(|| "n/a".into(), |a| format!("{a:.4}"));
                println!(
                    "{} ({}): {} observed, {} linked pairs, sender anonymity {anon}, {} originators identified",
                    r.name, r.kind, r.observed, r.linker.linked_pairs, r.identified_originators
                );
            }
        }
        Command::Oracle { scenario } => {
            let outcome = cmd_oracle(&scenario.load(false)?)?;
            print!("{}", oracle_table(&outcome));
            match outcome.verdict {
                OracleVerdict::Match => {}
                OracleVerdict::Mismatch(d) => return Err(SimError::OracleMismatch(d.len())),
                OracleVerdict::Invalid(why) => return Err(SimError::OracleInvalid(why)),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
