//! `jitai run --scenario <file>`: sweep a walk-probability grid and write
//! CSV summaries, per-trial logs and SVG charts.

mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use jitai_core::harness::{plot::emit_plots, run_sweep};
use jitai_core::Error;
use log::info;

use crate::scenario::Overrides;

#[derive(Parser)]
#[command(name = "jitai", version, about = "LLM-filtered Thompson Sampling sweeps on a step-count simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (p_w11, p_w00) cell of a scenario for each seed and mode.
    Run {
        /// Scenario file, TOML (`.toml`) or JSON.
        #[arg(long)]
        scenario: PathBuf,
        /// Added to every seed in the scenario.
        #[arg(long, value_name = "N")]
        seed_base: Option<u64>,
        /// Output directory; overrides `output_dir` in the scenario.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Query a chat-completions endpoint instead of the mock oracle.
        #[arg(long)]
        live_llm: bool,
        /// Environment variable holding the endpoint's API key.
        #[arg(long, value_name = "NAME")]
        api_key_env: Option<String>,
        /// Skip SVG chart generation.
        #[arg(long)]
        no_plots: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Usage(_) | Error::InvalidParameter { .. } => 2,
        _ => 1,
    }
}

fn run(cmd: Command) -> jitai_core::Result<()> {
    let Command::Run {
        scenario,
        seed_base,
        out,
        live_llm,
        api_key_env,
        no_plots,
    } = cmd;
    let overrides = Overrides {
        seed_base,
        out,
        live_llm,
        api_key_env,
    };
    let spec = scenario::apply(scenario::load(&scenario)?, &overrides)?;

    let start = Instant::now();
    let result = run_sweep(&spec)?;
    info!("sweep finished in {:.2?}", start.elapsed());

    if !no_plots {
        let written = emit_plots(&result, &spec.output_dir)?;
        info!("wrote {} charts", written.len());
    }

    println!("p_w11\tp_w00\tmode\tmedian\tq25\tq75");
    for cell in &result.cells {
        for m in &cell.modes {
            let q = m.quartiles;
            println!(
                "{}\t{}\t{}\t{:.1}\t{:.1}\t{:.1}",
                cell.cell.p_w11, cell.cell.p_w00, m.mode, q.median, q.q25, q.q75
            );
        }
    }
    println!("results in {}", spec.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
