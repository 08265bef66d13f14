use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use physlearn::{catalog, find, run, ParamValue, RunConfig, EXIT_CONFIG, OUT_DIR_ENV};

/// Seeded experiments on stochastic learning machines.
#[derive(Debug, Parser)]
#[command(name = "physlearn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List every experiment with the figure it reproduces.
    List,
    /// Show the parameters of one experiment and their defaults.
    Show { experiment: String },
    /// Run one experiment and write CSV tables plus a manifest.
    Run {
        experiment: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Parameter override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// JSON object of parameter values, applied before --set.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Output root; files go to <OUT>/<experiment>/.
        #[arg(long, env = OUT_DIR_ENV, default_value = "physlearn-out")]
        out: PathBuf,
        /// Worker threads (0 = all cores); results do not depend on it.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG as u8) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::List => {
            for e in catalog() {
                println!("{:<15} {:<38} {}", e.name, e.reproduces, e.description);
            }
            ExitCode::SUCCESS
        }
        Command::Show { experiment } => match find(&experiment) {
            Ok(e) => {
                println!("{}: {}", e.name, e.description);
                for spec in e.param_specs() {
                    let default = match &spec.default {
                        ParamValue::Float(x) => x.to_string(),
                        ParamValue::Int(n) => n.to_string(),
                        ParamValue::Choice { options, .. } => options.join("|"),
                    };
                    println!("  {:<18} {:<22} {}", spec.key, default, spec.help);
                }
                ExitCode::SUCCESS
            }
            Err(err) => {
                eprintln!("error: {err}");
                ExitCode::from(err.exit_code() as u8)
            }
        },
        Command::Run { experiment, seed, overrides, config, out, threads } => {
            let config = RunConfig { experiment, seed, config_file: config, overrides, out_dir: out, threads };
            match run(&config) {
                Ok(report) => {
                    println!("{}", report.dir.join("manifest.json").display());
                    ExitCode::SUCCESS
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    ExitCode::from(err.exit_code() as u8)
                }
            }
        }
    }
}
