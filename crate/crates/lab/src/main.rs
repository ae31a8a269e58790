use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use odt_lab::config::{self, Config};
use odt_lab::{output, report, study, Command};

const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "odt-lab", version, about = "On-demand transit simulation and appraisal")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario config (TOML)
    config: PathBuf,
    /// Output directory [default: config out_dir, else out/<scenario>]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides ODT_LAB_SEED and the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Simulations run in parallel [default: available cores]
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a config and its input files without simulating
    Validate { config: PathBuf },
    /// Simulate the [system] over the demand levels
    Run(RunArgs),
    /// Simulate every sweep system over the demand levels
    Sweep(RunArgs),
    /// Summarize an output directory
    Report {
        #[arg(required_unless_present = "show_params")]
        dir: Option<PathBuf>,
        /// Print default parameters and units
        #[arg(long)]
        show_params: bool,
    },
}

fn load(path: &Path) -> Result<(Config, Vec<String>), ExitCode> {
    match config::load(path) {
        Ok((cfg, warnings)) => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            Ok((cfg, warnings))
        }
        Err(diag) => {
            for w in &diag.warnings {
                eprintln!("warning: {w}");
            }
            for e in &diag.errors {
                eprintln!("error: {e}");
            }
            Err(ExitCode::from(EXIT_INVALID))
        }
    }
}

fn seed_for(flag: Option<u64>, cfg: &Config) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("ODT_LAB_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| format!("ODT_LAB_SEED={v} is not an unsigned integer")),
        Err(_) => Ok(cfg.seed),
    }
}

fn simulate(args: RunArgs, command: Command) -> ExitCode {
    let (cfg, mut warnings) = match load(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if command == Command::Run && cfg.system.is_none() {
        eprintln!("error: system: missing section, needed by run");
        return ExitCode::from(EXIT_INVALID);
    }
    let seed = match seed_for(args.seed, &cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let inputs = match study::load_inputs(&cfg, seed) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let config_sha256 = match std::fs::read(&args.config) {
        Ok(bytes) => output::sha256_hex(&bytes),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let out = args
        .out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.scenario));
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    match odt_lab::execute(&cfg, &inputs, command, seed, jobs, config_sha256, &out, &mut warnings) {
        Ok(()) => {
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Cmd::Validate { config } => {
            let (cfg, _) = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let seed = seed_for(None, &cfg).unwrap_or(cfg.seed);
            match study::load_inputs(&cfg, seed) {
                Ok(inputs) => {
                    println!(
                        "ok: {} nodes, {} edges, {} requests",
                        inputs.net.nodes().len(),
                        inputs.net.edges().len(),
                        inputs.demand.len()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_INVALID)
                }
            }
        }
        Cmd::Run(args) => simulate(args, Command::Run),
        Cmd::Sweep(args) => simulate(args, Command::Sweep),
        Cmd::Report { dir, show_params } => {
            if show_params {
                print!("{}", report::render_params());
            }
            if let Some(dir) = dir {
                match report::render(&dir) {
                    Ok(text) => print!("{text}"),
                    Err(e) => {
                        eprintln!("error: {e:#}");
                        return ExitCode::from(EXIT_INVALID);
                    }
                }
            }
            ExitCode::SUCCESS
        }
    }
}
