use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pwframes::harness::{self, ExperimentConfig, EXIT_INVALID_CONFIG, EXIT_OK, EXIT_UNCERTIFIED};
use pwframes::Error;

#[derive(Parser)]
#[command(name = "pwframes", version, about = "Sampling and frame reconstruction of bandlimited functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a rho-lattice and write lattice.csv and certificate.json.
    Lattice(RunArgs),
    /// Sample and reconstruct a random function; writes report.json and run.json.
    Reconstruct(RunArgs),
    /// Run a grid of (rho, n, multiplier) cells; writes sweep.csv.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> pwframes::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> pwframes::Result<i32> {
    match &cli.command {
        Command::Lattice(args) => {
            let lattice = harness::cmd_lattice(&args.load()?, &args.out)?;
            println!("{} points, rho = {}", lattice.points.len(), lattice.rho);
            Ok(EXIT_OK)
        }
        Command::Reconstruct(args) => {
            let (outcome, code) = harness::cmd_reconstruct(&args.load()?, &args.out)?;
            let r = &outcome.report;
            if code == EXIT_UNCERTIFIED {
                eprintln!("not certified: A = {:e}, B = {:e}", r.a, r.b);
            } else {
                println!(
                    "A = {:e}, B = {:e}, iterations = {}, rel_error = {}",
                    r.a,
                    r.b,
                    r.iterations,
                    r.rel_error.map_or("n/a".into(), |e| format!("{e:e}"))
                );
            }
            Ok(code)
        }
        Command::Sweep(args) => {
            let rows = harness::cmd_sweep(&args.load()?, &args.out)?;
            let certified = rows.iter().filter(|r| r.certified).count();
            println!("{} cells, {} certified", rows.len(), certified);
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(Error::NotCertified) => {
            eprintln!("error: not certified");
            EXIT_UNCERTIFIED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID_CONFIG
        }
    };
    ExitCode::from(code as u8)
}
