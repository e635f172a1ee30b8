use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ntsim::builtin::{self, BUILTINS};
use ntsim::report::{aggregate_runs, emit_aggregate, emit_csv};
use ntsim::runner::{check_completed, run_scenario};
use ntsim::scenario::parse;
use ntsim::{ConfigError, HarnessError};

#[derive(Parser)]
#[command(name = "ntsim", version, about = "nTorrent over NDN scenario runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file or built-in scenario and write CSV reports.
    Run {
        spec: String,
        /// Dotted-path override, e.g. `consumer.window=500`.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        reps: u64,
        #[arg(long, default_value_t = 90.0)]
        percentile: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Base seed; repetition k uses seed + k.
        #[arg(long)]
        seed: Option<u64>,
        /// Use a 100 MiB torrent instead of the scenario's size.
        #[arg(long)]
        full_scale: bool,
    },
    /// Parse and validate a scenario without running it.
    Validate { spec: String },
    /// List built-in scenarios.
    ListScenarios,
}

fn exit_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Config(_) => 2,
        HarnessError::Aborted(_) => 3,
        _ => 1,
    }
}

fn run(cmd: Cmd) -> Result<(), HarnessError> {
    match cmd {
        Cmd::ListScenarios => {
            for (name, src) in BUILTINS {
                let desc = parse(src, &[]).map(|(s, _)| s.description).unwrap_or_default();
                println!("{name}\t{desc}");
            }
            Ok(())
        }
        Cmd::Validate { spec } => {
            let src = builtin::source(&spec)?;
            let r = ntsim::load(&src, &[])?;
            println!(
                "{}: ok ({} nodes, {} links, {} apps, {} packets)",
                r.scenario.name,
                r.topology.nodes().len(),
                r.topology.links().len(),
                r.apps.len(),
                r.shape.total_packets()
            );
            Ok(())
        }
        Cmd::Run { spec, overrides, reps, percentile, out, seed, full_scale } => {
            if !(0.0..=100.0).contains(&percentile) {
                return Err(ConfigError::Override(format!("percentile {percentile} is outside [0, 100]")).into());
            }
            let src = builtin::source(&spec)?;
            let (mut sc, text) = parse(&src, &overrides)?;
            if let Some(s) = seed {
                sc.sim.seed = s;
            }
            if full_scale {
                sc.full_scale();
            }
            let resolved = sc.resolve(&text)?;
            let results = run_scenario(&resolved, resolved.network.seed, reps as usize)?;
            for (k, r) in results.iter().enumerate() {
                let dir = if results.len() == 1 { out.clone() } else { out.join(format!("rep{k}")) };
                emit_csv(r, &dir)?;
            }
            let rows = aggregate_runs(&results, percentile);
            emit_aggregate(&rows, percentile, &out)?;
            eprintln!(
                "{}: {} repetition(s), config {}, results in {}",
                resolved.scenario.name,
                results.len(),
                &results[0].config_hash[..12],
                out.display()
            );
            for r in &results {
                check_completed(r)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
