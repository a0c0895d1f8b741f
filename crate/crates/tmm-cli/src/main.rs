//! `tmm` — run, verify, benchmark, and explore the tiled int8 accelerator
//! model from the command line.
//!
//! Every command prints a JSON report (schema 1) to stdout; diagnostics go
//! to stderr. Exit codes: 0 success, 1 runtime or verification failure,
//! 2 usage error, 3 internal invariant breach.

mod commands;
mod report;

use clap::{Parser, Subcommand};

use commands::{AttnDemoArgs, BenchArgs, DseArgs, GemmArgs, TrafficArgs, VerifyArgs};

#[derive(Parser)]
#[command(
    name = "tmm",
    version,
    about = "Tiled int8 matrix-multiplication accelerator model",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one tiled GEMM on seeded-random or file operands.
    Gemm(GemmArgs),
    /// Randomized bit-exactness checks against the reference GEMM.
    Verify(VerifyArgs),
    /// Benchmark a named workload case and report modeled performance.
    Bench(BenchArgs),
    /// Sweep tile configurations; report modeled cost and feasibility.
    Dse(DseArgs),
    /// Compare external-memory traffic across dataflows.
    Traffic(TrafficArgs),
    /// Quantized Q/K/V projection demo with activation reuse.
    AttnDemo(AttnDemoArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gemm(args) => commands::gemm(args),
        Command::Verify(args) => commands::verify(args),
        Command::Bench(args) => commands::bench(args),
        Command::Dse(args) => commands::dse(args),
        Command::Traffic(args) => commands::traffic(args),
        Command::AttnDemo(args) => commands::attn_demo(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

#[allow(dead_code)]
fn assert_cli_wiring() {
    use clap::CommandFactory;
    Cli::command().debug_assert();
}

#[cfg(test)]
mod tests {
    #[test]
    fn cli_wiring_is_consistent() {
        super::assert_cli_wiring();
    }
}
